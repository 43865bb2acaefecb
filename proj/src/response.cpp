#include "response.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace facet::detail {
namespace {

constexpr double kDbToNeper = std::numbers::ln10 / 10.0;
constexpr double kSearchLow = -400.0;  // dB
constexpr double kSearchHigh = 2000.0;

}  // namespace

FeedbackLaw::FeedbackLaw(const CodeParams& code, double guard_db) : code_(code), guard_(guard_db) {
  // dh/dx at -inf equals u2 - ln10/10; the peak only exists when that is positive.
  if (dh(kSearchLow) <= 0.0) {
    peak_ = -std::numeric_limits<double>::infinity();
    return;
  }
  double lo = kSearchLow;
  double hi = 0.0;
  while (dh(hi) > 0.0) hi = 2.0 * hi + 50.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (dh(mid) > 0.0 ? lo : hi) = mid;
  }
  peak_ = 0.5 * (lo + hi);
}

double FeedbackLaw::tightened_t(double x_db) const {
  const double t = critical_uplink_snr_db(x_db, code_);
  return std::clamp(t, code_.t_floor() + guard_, code_.t_ceiling() - guard_);
}

double FeedbackLaw::log_abs_slope(double x_db) const {
  if (std::isinf(x_db)) return -std::numeric_limits<double>::infinity();
  const double a = code_.u1 + code_.u2 * x_db;
  if (a > 0.0) return std::log(code_.u2) - a - 2.0 * std::log1p(code_.u3 * std::exp(-a));
  return std::log(code_.u2) + a - 2.0 * std::log(std::exp(a) + code_.u3);
}

double FeedbackLaw::h(double x_db) const {
  const double t = critical_uplink_snr_db(x_db, code_);
  return kDbToNeper * (t - x_db) + log_abs_slope(x_db);
}

double FeedbackLaw::dh(double x_db) const {
  const double a = code_.u1 + code_.u2 * x_db;
  // (u3 - E) / (E + u3) in an overflow-safe form
  double shape;
  if (a > 0.0) {
    const double inv = code_.u3 * std::exp(-a);
    shape = (inv - 1.0) / (1.0 + inv);
  } else {
    const double e = std::exp(a);
    shape = (code_.u3 - e) / (e + code_.u3);
  }
  return kDbToNeper * (critical_uplink_snr_slope(x_db, code_) - 1.0) + code_.u2 * shape;
}

bool FeedbackLaw::falling_root(double target, double x_max, double& root) const {
  const double lo = std::isinf(peak_) ? kSearchLow : peak_;
  if (x_max <= lo) return false;
  const double h_lo = h(lo);
  if (!(h_lo >= target)) return false;
  if (h_lo == target) {
    root = lo;
    return true;
  }
  // Expand upward until h drops below the target (h falls at least linearly past the peak).
  double a = lo;
  double h_a = h_lo;
  double hi = lo;
  double h_hi = h_lo;
  double step = 8.0;
  const double cap = std::min(x_max, kSearchHigh);
  while (true) {
    const double next = std::min(hi + step, cap);
    if (!(next > hi)) return false;
    const double h_next = h(next);
    if (h_next <= target) {
      hi = next;
      h_hi = h_next;
      break;
    }
    a = hi = next;
    h_a = h_next;
    step *= 2.0;
  }
  if (h_hi == target) {
    root = hi;
    return true;
  }
  auto f = [&](double x) { return h(x) - target; };
  std::uintmax_t max_iter = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      f, a, hi, h_a - target, h_hi - target, boost::math::tools::eps_tolerance<double>(50), max_iter);
  root = 0.5 * (bracket.first + bracket.second);
  return true;
}

}  // namespace facet::detail
