#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace facet::detail {

Model::Model(const Problem& problem, const Restriction& restriction, double guard_db)
    : problem_(problem),
      law_(problem.code, guard_db),
      fixed_rho_(restriction.fixed_rho),
      fixed_t_(restriction.fixed_t_db),
      L_(problem.num_devices()),
      S_(problem.num_subcarriers()),
      t_lo_(problem.code.t_floor() + guard_db),
      t_hi_(problem.code.t_ceiling() - guard_db) {
  own_ = problem.assignment.subcarrier_of;
  own_u2_.resize(L_);
  for (int l = 0; l < L_; ++l) own_u2_[l] = problem.coeffs.U2(own_[l], l);
}

double Model::snr_db(int l, double p_own, double rho) const {
  const double lin = p_own * (1.0 - rho) * own_u2_[l];
  if (!(lin > 0.0)) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(lin);
}

double Model::t_of(double x_db) const {
  if (fixed_t_) return *fixed_t_;
  return law_.tightened_t(x_db);
}

double Model::slope_of(double x_db) const {
  if (fixed_t_ || std::isinf(x_db)) return 0.0;
  const double raw = critical_uplink_snr_db(x_db, problem_.code);
  if (raw <= t_lo_ || raw >= t_hi_) return 0.0;
  return -critical_uplink_snr_slope(x_db, problem_.code);
}

double Model::rf(int l, const std::vector<double>& p) const {
  double h = 0.0;
  for (int s = 0; s < S_; ++s) {
    if (problem_.device_of[s] >= 0) h += p[s] * gain(s, l);
  }
  return h;
}

void Model::evaluate(const std::vector<double>& p, const std::vector<double>& rho, PointEval& out) const {
  out.x_db.resize(L_);
  out.t_db.resize(L_);
  out.slope.resize(L_);
  out.uplink.resize(L_);
  out.rf.resize(L_);
  out.net.resize(L_);
  out.r = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < L_; ++l) {
    const double x = snr_db(l, p[own_[l]], rho[l]);
    out.x_db[l] = x;
    out.t_db[l] = t_of(x);
    out.slope[l] = slope_of(x);
    out.uplink[l] = u0(l) * std::pow(10.0, out.t_db[l] / 10.0);
    out.rf[l] = rf(l, p);
    out.net[l] = out.uplink[l] - rho[l] * kappa() * out.rf[l];
    out.r = std::max(out.r, out.net[l]);
  }
}

double Model::net_of(int l, double p_own, double rho, double h) const {
  return uplink_of(l, snr_db(l, p_own, rho)) - rho * kappa() * h;
}

double Model::best_rho(int l, double p_own, double h) const {
  if (fixed_rho_) return *fixed_rho_;
  const double kh = kappa() * h;
  double best = 0.0;
  double best_val = net_of(l, p_own, 0.0, h);
  const double x0 = snr_db(l, p_own, 0.0);
  if (std::isfinite(x0) && kh > 0.0 && !fixed_t_) {
    // Interior stationary point: U0 * G(x) * 10^{x0/10} = kappa * H on the falling branch.
    const double target = std::log(kh / u0(l)) - std::numbers::ln10 / 10.0 * x0;
    double x = 0.0;
    if (law_.falling_root(target, x0, x)) {
      const double rho = std::clamp(1.0 - std::pow(10.0, (x - x0) / 10.0), 0.0, 1.0);
      const double val = net_of(l, p_own, rho, h);
      if (val < best_val) {
        best = rho;
        best_val = val;
      }
    }
  }
  if (net_of(l, p_own, 1.0, h) < best_val) best = 1.0;
  return best;
}

}  // namespace facet::detail
