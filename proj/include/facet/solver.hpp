#pragma once

// Stage two: downlink feedback powers, power-splitting ratios and uplink SNR targets that
// minimise the worst-case net power  max_l (P_l - E_l)  for a fixed subcarrier assignment.
//
// Per device l served on subcarrier s(l):
//   feedback SNR   x_l  = 10 log10( p_s(l) (1 - rho_l) U2[s(l)][l] )
//   uplink power   P_l  = U0_l 10^{t_l / 10},  t_l >= t(x_l)  (feedback-code law)
//   harvested      E_l  = rho_l * sum_{s assigned} U1[s][l] p_s
// subject to  sum_s p_s <= P_total,  p >= 0,  0 <= rho <= 1.
//
// The epigraph form  min r  s.t.  P_l - E_l <= r  is solved in two phases. A continuation
// on the log-sum-exp smoothing of the max takes multiplicative steps on the budget face
// for p, with each rho at its exact best response; an active-set Newton solve of the KKT
// system then certifies the result. The closed-form block updates and the subgradient
// multiplier step are exposed as separate operations.

#include <optional>
#include <string>
#include <vector>

#include "facet/assign.hpp"
#include "facet/fbcode.hpp"
#include "facet/scene.hpp"

namespace facet {

/// Everything stage two needs for one instance.
struct Problem {
  ChannelRealization realization;
  Assignment assignment;
  Coefficients coeffs;
  CodeParams code;
  double total_power = 0.0;  // W
  std::vector<int> device_of;  // per subcarrier, -1 when unassigned

  int num_devices() const { return realization.num_devices; }
  int num_subcarriers() const { return realization.num_subcarriers; }
};

/// Validates the pieces against each other. total_power may be zero.
Problem make_problem(ChannelRealization realization, Assignment assignment, double kappa,
                     CodeParams code, double total_power);

/// Primal point (p_tilde per subcarrier, rho and t per device).
struct Allocation {
  std::vector<double> p_tilde;
  std::vector<double> rho;
  std::vector<double> t;  // dB
};

struct AllocationSolution {
  Allocation allocation;
  double r = 0.0;  // W, worst-case net power
  std::vector<double> uplink_power;     // W
  std::vector<double> harvested_power;  // W
  std::vector<double> received_rf;      // W
  std::vector<double> feedback_snr_db;  // -inf when no feedback power reaches the decoder
  std::vector<double> net_power;        // W
  /// Splitting ratio of the devices that set the worst case, weighted by their multipliers.
  double optimal_rho = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Multipliers of the two Lagrangian subproblems. gamma/nu belong to the t-subproblem
/// (net-power and direct t-constraint), lambda/mu/eta to the power/splitting subproblem
/// (net-power, log-form t-constraint, total power).
struct DualState {
  std::vector<double> gamma;
  std::vector<double> nu;
  std::vector<double> lambda;
  std::vector<double> mu;
  double eta = 0.0;
  int step_index = 1;
};

enum class PowerNumerator {
  assigned_device,  // mu of the device served on s (stationarity of the Lagrangian)
  all_devices,      // sum of all mu, as typeset in the original closed form
};

struct SolverConfig {
  int max_outer_iters = 10000;
  double step_a0 = 0.5;          // step(k) = a0 / k^decay on normalised residuals
  double step_decay = 0.5;
  double tolerance = 1e-6;       // relative change of r
  int patience = 10;             // consecutive iterations below tolerance
  double t_guard_db = 1e-6;      // keeps t strictly inside (u0, u0 + 1/u3)
  double init_rho = 0.5;
  double init_multiplier = 1.0;
  double power_cap_w = 0.0;      // p_s for degenerate denominators; 0 means P_total
  PowerNumerator power_numerator = PowerNumerator::assigned_device;
  bool record_trace = false;

  bool operator==(const SolverConfig&) const = default;
};

std::vector<std::string> validate(const SolverConfig& config);

/// Variables held fixed while the remaining ones are optimised (baseline schemes).
struct Restriction {
  std::optional<double> fixed_rho;
  std::optional<double> fixed_t_db;
};

struct TraceRecord {
  int iter = 0;
  double r_watt = 0.0;
  double power_slack = 0.0;       // P_total - sum p
  double max_t_residual_db = 0.0; // max_l (t(x_l) - t_l)
  double lambda_max = 0.0;
  int active_devices = 0;         // lambda > 0
  double mu_sum = 0.0;
  double eta = 0.0;
  bool degenerate_power = false;
};

struct SolveResult {
  AllocationSolution solution;
  DualState duals;  // multipliers belonging to the returned iterate
  std::vector<TraceRecord> trace;
  int degenerate_power_events = 0;
  /// The returned point passed the active-set KKT refinement.
  bool refined = false;
  std::string refine_status;  // empty when refined, otherwise the reason it was not
};

// --- per-device evaluations --------------------------------------------------------------

/// Effective feedback SNR in dB, -inf when the decoder receives no power.
std::vector<double> effective_feedback_snr_db(const Problem& problem, const Allocation& allocation);

/// Total RF power reaching each device from every powered (assigned) subcarrier.
std::vector<double> received_rf_power(const Problem& problem, const Allocation& allocation);

struct NetPower {
  std::vector<double> per_device;  // W, may be negative
  double max = 0.0;
};

/// P_l - rho_l kappa P~_l using the allocation's t as given.
NetPower net_power(const Problem& problem, const Allocation& allocation);

/// t_l = t(x_l), clamped into (u0 + guard, u0 + 1/u3 - guard).
std::vector<double> tighten_t(const Problem& problem, const Allocation& allocation, double guard_db);

/// Fills every derived metric of a solution from its allocation.
AllocationSolution evaluate(const Problem& problem, const Allocation& allocation);

// --- closed-form block updates ------------------------------------------------------------

struct PowerUpdate {
  std::vector<double> p_tilde;
  int degenerate = 0;  // assigned subcarriers whose denominator was <= 0
};

/// p_s = (sum_j delta_sj) [ mu / (eta - sum_l lambda_l rho_l U1[s][l]) ]^+ with the
/// numerator chosen by config.power_numerator.
PowerUpdate update_power(const DualState& duals, const Problem& problem, const Allocation& allocation,
                         const SolverConfig& config);

/// rho_l = [1 - mu_l / (lambda_l sum_{s assigned} U1[s][l] p_s)] clamped to [0,1];
/// 0 when the denominator vanishes.
std::vector<double> update_rho(const DualState& duals, const Problem& problem, const Allocation& allocation);

/// One projected subgradient step at step(k) = a0 / k^decay.
/// Residuals: net - r for lambda and gamma (divided by residual_scale, W), log-form t
/// residual for mu, direct t residual in dB for nu, sum p - P_total for eta. Every
/// multiplier is projected onto >= 0 and the step index advances.
DualState dual_step(const DualState& duals, const Problem& problem, const Allocation& allocation, double r,
                    const SolverConfig& config, double residual_scale);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> v);

// --- driver -------------------------------------------------------------------------------

/// Smoothed descent from a uniform start and from the rho = 0 optimum (plus a harvest-first
/// start when neither certifies), each followed by KKT refinement. Returns the best point;
/// converged is set only when that point passed the refinement.
SolveResult solve(const Problem& problem, const SolverConfig& config, const Restriction& restriction = {});

// --- verification -------------------------------------------------------------------------

struct ConstraintResiduals {
  double power_slack = 0.0;                // P_total - sum p  (>= 0 feasible)
  std::vector<double> rho_slack;           // min(rho, 1 - rho)
  std::vector<double> t_direct_slack;      // t_l - t(x_l)  (>= 0 feasible)
  std::vector<double> t_log_slack;         // ln(U2 (1-rho) p) - required log SNR (>= 0 feasible)
  std::vector<bool> t_log_in_domain;       // false where the log form is undefined
};

ConstraintResiduals constraint_residuals(const Problem& problem, const Allocation& allocation);

/// Value of the combined Lagrangian
///   r + sum lambda (net - r) + sum mu (g(t) - ln(U2 (1-rho) p)) + eta (sum p - P_total).
double lagrangian(const Problem& problem, const Allocation& allocation, double r, const DualState& duals);

struct KktReport {
  double power_violation = 0.0;        // max(0, sum p - P_total), W
  double rho_violation = 0.0;
  double max_t_residual_db = 0.0;      // max(0, t(x) - t)
  double min_multiplier = 0.0;         // dual feasibility: >= 0
  double simplex_residual = 0.0;       // |1 - sum lambda|
  double max_comp_slackness = 0.0;     // normalised
  double max_power_stationarity = 0.0; // |dL/dp_s| * P_total / scale, interior p_s
  double max_rho_stationarity = 0.0;   // |dL/drho_l| / scale, interior rho, projected at bounds
  double max_t_stationarity = 0.0;     // |dL/dt_l| / scale
  /// max over devices of the relative mismatch in 10^{t/10} = 10 nu / (gamma U0 ln10).
  double t_identity_mismatch = 0.0;
  double scale = 0.0;                  // W, normalisation of the gaps
};

/// guard_db must match the solver's t guard so clamped targets are recognised.
KktReport kkt_report(const Problem& problem, const AllocationSolution& solution, const DualState& duals,
                     double guard_db = 1e-6);

}  // namespace facet
