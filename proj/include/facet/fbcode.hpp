#pragma once

// Feedback-code uplink SNR law.
//
// A feedback channel code reaches its target block error rate at an uplink SNR that
// depends on the SNR of the downlink feedback it receives:
//
//   t(x) = u0 + 1 / (exp(u1 + u2 * x) + u3),      x = feedback SNR in dB.
//
// t is strictly decreasing in x and saturates at u0 for good feedback. With no feedback
// (x = -inf) it takes the finite worst case u0 + 1/u3.

#include <string>
#include <vector>

namespace facet {

struct CodeParams {
  double u0 = -2.0;   // dB, saturation floor
  double u1 = 0.5;
  double u2 = 0.25;   // per dB
  double u3 = 0.08;
  double target_bler = 1e-3;
  // Block metadata; descriptive only. A frame carries N = 2*Q*G real channel symbols.
  int info_bits = 64;        // K
  int channel_symbols = 600; // N
  int frame_symbols = 30;    // Q
  int frames = 10;           // G

  /// Lower end of the reachable uplink SNR interval (open).
  double t_floor() const { return u0; }
  /// Upper end of the reachable uplink SNR interval (open).
  double t_ceiling() const { return u0 + 1.0 / u3; }

  bool operator==(const CodeParams&) const = default;
};

/// Every violated invariant; empty when valid.
std::vector<std::string> validate(const CodeParams& params);

/// Critical uplink SNR (dB) for a given feedback SNR (dB). Accepts -inf for zero feedback
/// power. Throws DomainError on NaN input or invalid parameters.
double critical_uplink_snr_db(double feedback_snr_db, const CodeParams& params);

/// d t / d x in dB per dB. Zero at x = -inf and x = +inf.
double critical_uplink_snr_slope(double feedback_snr_db, const CodeParams& params);

/// Feedback SNR (dB) needed so that the critical uplink SNR equals t.
/// t must lie strictly inside (u0, u0 + 1/u3).
double inverse_feedback_snr_db(double t_db, const CodeParams& params);

/// Left-hand side of the t-constraint in logarithmic form:
///   ln10/(10 u2) * [ln(1/(t - u0) - u3) - u1],
/// i.e. the natural log of the linear feedback SNR required by t.
double required_log_feedback_snr(double t_db, const CodeParams& params);

/// Uplink transmit power reaching SNR t over an uplink with noise-to-gain ratio u0_coeff.
double required_uplink_power_w(double t_db, double u0_coeff);

}  // namespace facet
