#pragma once

// Exact one-dimensional responses behind the closed-form power and splitting updates.
//
// With t tightened, device l's uplink power is P(x) = U0 * 10^{t(x)/10} where x is its
// feedback SNR in dB. Write G(x) = P(x) |t'(x)| 10^{-x/10} / U0 = exp(h(x)). Then
//   - the power stationarity  mu / p = eta - a  with  mu = lambda * P * |t'(x)|  reads
//     lambda * c * U0 * G(x) = eta - a,  c = U2 * (1 - rho);
//   - the splitting stationarity  rho = 1 - mu / (lambda * kappa * H)  reads
//     U0 * G(x) * 10^{x0/10} = kappa * H.
// h rises to a single peak and then falls; local minima of the underlying objectives sit
// on the falling branch, so both updates reduce to a root of h on that branch.

#include "facet/fbcode.hpp"

namespace facet::detail {

class FeedbackLaw {
 public:
  FeedbackLaw(const CodeParams& code, double guard_db);

  const CodeParams& code() const { return code_; }

  /// Tightened and guarded uplink SNR target for feedback SNR x (dB, may be -inf).
  double tightened_t(double x_db) const;
  /// ln|t'(x)|, -inf at x = -inf.
  double log_abs_slope(double x_db) const;
  /// h(x) = (ln10/10) t(x) + ln|t'(x)| - (ln10/10) x  (unguarded t).
  double h(double x_db) const;
  /// dh/dx.
  double dh(double x_db) const;
  /// Location of the maximum of h; -inf when h is decreasing everywhere.
  double peak() const { return peak_; }

  /// Root of h(x) = target on the falling branch, restricted to x <= x_max.
  /// Returns false when the target exceeds the branch maximum or the root lies beyond x_max.
  bool falling_root(double target, double x_max, double& root) const;

 private:
  CodeParams code_;
  double guard_;
  double peak_;
};

}  // namespace facet::detail
