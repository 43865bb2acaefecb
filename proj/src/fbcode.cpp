#include "facet/fbcode.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "facet/error.hpp"

namespace facet {
namespace {

void require_valid(const CodeParams& params) {
  if (!(std::isfinite(params.u0) && std::isfinite(params.u1) && std::isfinite(params.u2) &&
        std::isfinite(params.u3))) {
    throw DomainError("code params: u0..u3 must be finite");
  }
  if (!(params.u2 > 0.0) || !(params.u3 > 0.0)) {
    throw DomainError("code params: u2 > 0 and u3 > 0 required");
  }
}

}  // namespace

std::vector<std::string> validate(const CodeParams& params) {
  std::vector<std::string> errors;
  if (!(std::isfinite(params.u0) && std::isfinite(params.u1) && std::isfinite(params.u2) &&
        std::isfinite(params.u3))) {
    errors.emplace_back("code_params: u0..u3 must be finite");
  }
  if (!(params.u2 > 0.0)) errors.emplace_back("code_params: u2 > 0 required");
  if (!(params.u3 > 0.0)) errors.emplace_back("code_params: u3 > 0 required");
  if (!(params.target_bler > 0.0 && params.target_bler < 1.0)) {
    errors.emplace_back("code_params: target_bler in (0,1) required");
  }
  if (params.info_bits <= 0 || params.channel_symbols <= 0 || params.frame_symbols <= 0 ||
      params.frames <= 0) {
    errors.emplace_back("code_params: block metadata K, N, Q, G must be positive");
  } else if (params.channel_symbols != 2 * params.frame_symbols * params.frames) {
    errors.emplace_back("code_params: N = 2QG required");
  }
  return errors;
}

double critical_uplink_snr_db(double feedback_snr_db, const CodeParams& params) {
  require_valid(params);
  if (std::isnan(feedback_snr_db)) throw DomainError("critical_uplink_snr_db: NaN feedback SNR");
  // exp() returns 0 at -inf and +inf at +inf, which gives both limits directly.
  const double e = std::exp(params.u1 + params.u2 * feedback_snr_db);
  return params.u0 + 1.0 / (e + params.u3);
}

double critical_uplink_snr_slope(double feedback_snr_db, const CodeParams& params) {
  require_valid(params);
  if (std::isnan(feedback_snr_db)) throw DomainError("critical_uplink_snr_slope: NaN feedback SNR");
  if (std::isinf(feedback_snr_db)) return 0.0;
  const double a = params.u1 + params.u2 * feedback_snr_db;
  // E / (E + u3)^2, rearranged so that neither branch overflows.
  double ratio;
  if (a > 0.0) {
    const double inv = std::exp(-a);
    const double d = 1.0 + params.u3 * inv;
    ratio = inv / (d * d);
  } else {
    const double e = std::exp(a);
    const double d = e + params.u3;
    ratio = e / (d * d);
  }
  return -params.u2 * ratio;
}

double inverse_feedback_snr_db(double t_db, const CodeParams& params) {
  require_valid(params);
  if (!(t_db > params.t_floor() && t_db < params.t_ceiling())) {
    throw DomainError("inverse_feedback_snr_db: t must lie in the open interval (" +
                      std::to_string(params.t_floor()) + ", " + std::to_string(params.t_ceiling()) +
                      ")");
  }
  const double inner = 1.0 / (t_db - params.u0) - params.u3;
  return (std::log(inner) - params.u1) / params.u2;
}

double required_log_feedback_snr(double t_db, const CodeParams& params) {
  return inverse_feedback_snr_db(t_db, params) * std::numbers::ln10 / 10.0;
}

double required_uplink_power_w(double t_db, double u0_coeff) {
  return u0_coeff * std::pow(10.0, t_db / 10.0);
}

}  // namespace facet
