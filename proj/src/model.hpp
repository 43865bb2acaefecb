#pragma once

// Per-instance evaluation shared by the solver driver, the active-set refinement and the
// baselines. Holds the assignment-resolved coefficients so the hot loops only index vectors.

#include <cmath>
#include <optional>
#include <vector>

#include "facet/solver.hpp"
#include "response.hpp"

namespace facet::detail {

struct PointEval {
  std::vector<double> x_db;    // feedback SNR
  std::vector<double> t_db;
  std::vector<double> slope;   // |dt/dx|, zero where t is clamped or fixed
  std::vector<double> uplink;  // W
  std::vector<double> rf;      // received RF power H, W
  std::vector<double> net;     // W
  double r = 0.0;
};

class Model {
 public:
  Model(const Problem& problem, const Restriction& restriction, double guard_db);

  int L() const { return L_; }
  int S() const { return S_; }
  const Problem& problem() const { return problem_; }
  const FeedbackLaw& law() const { return law_; }
  bool rho_fixed() const { return fixed_rho_.has_value(); }
  double fixed_rho() const { return *fixed_rho_; }
  bool t_fixed() const { return fixed_t_.has_value(); }
  double total_power() const { return problem_.total_power; }
  double kappa() const { return problem_.coeffs.kappa; }

  int own(int l) const { return own_[l]; }
  int device_on(int s) const { return problem_.device_of[s]; }
  /// U2 on the device's own subcarrier, per W.
  double own_u2(int l) const { return own_u2_[l]; }
  double u0(int l) const { return problem_.coeffs.U0[l]; }
  double gain(int s, int l) const { return problem_.realization.downlink_gain(s, l); }

  double snr_db(int l, double p_own, double rho) const;
  /// Guarded t for feedback SNR x, or the fixed target.
  double t_of(double x_db) const;
  /// |dt/dx| consistent with t_of (zero on the clamps).
  double slope_of(double x_db) const;
  double uplink_of(int l, double x_db) const { return u0(l) * std::pow(10.0, t_of(x_db) / 10.0); }

  /// Received RF power of device l: sum over assigned subcarriers of p_s * gain(s, l).
  double rf(int l, const std::vector<double>& p) const;

  void evaluate(const std::vector<double>& p, const std::vector<double>& rho, PointEval& out) const;

  /// Net power of device l as a function of its own splitting ratio (p fixed).
  double net_of(int l, double p_own, double rho, double h) const;

  /// Minimiser of device l's net power over rho in [0, 1] for fixed p (ties go to the smaller rho).
  double best_rho(int l, double p_own, double h) const;

 private:
  const Problem& problem_;
  FeedbackLaw law_;
  std::optional<double> fixed_rho_;
  std::optional<double> fixed_t_;
  int L_;
  int S_;
  std::vector<int> own_;
  std::vector<double> own_u2_;
  double t_lo_;
  double t_hi_;
};

}  // namespace facet::detail
