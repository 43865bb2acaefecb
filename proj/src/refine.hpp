#pragma once

// Active-set Newton refinement of a min-max stationary point.
//
// Given a guess of which devices set the worst case (A), which subcarriers carry power
// and which splitting ratios are interior, the KKT conditions of
//   min r  s.t.  net_l(p, rho) <= r,  sum p = P_total,  p >= 0,  0 <= rho <= 1
// form a square nonlinear system in (p, rho, lambda_A, eta, r). Newton solves it; the sets
// are then corrected one violation at a time until every sign condition holds.

#include <string>
#include <vector>

#include "model.hpp"

namespace facet::detail {

struct RefineResult {
  bool certified = false;
  std::vector<double> p;
  std::vector<double> rho;
  std::vector<double> lambda;  // sums to one, zero off the active set
  double eta = 0.0;
  double r = 0.0;
  int newton_iters = 0;
  int set_changes = 0;
  std::string reason;  // why certification failed
};

/// Tries several initial active sets; only a certified point with r <= r_bound is accepted.
RefineResult refine(const Model& model, std::vector<double> p, std::vector<double> rho,
                    const std::vector<double>& lambda_hint, double r_bound);

}  // namespace facet::detail
