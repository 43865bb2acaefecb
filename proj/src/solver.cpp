#include "facet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>


#include "facet/error.hpp"
#include "model.hpp"
#include "refine.hpp"

namespace facet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDbToNeper = std::numbers::ln10 / 10.0;
// Smoothing temperatures relative to the objective scale.
constexpr double kSmoothStart = 1e-1;
constexpr double kSmoothEnd = 1e-6;
constexpr double kSmoothFactor = 0.1;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> own_gain(const Problem& problem) {
  std::vector<double> g(problem.num_devices());
  for (int l = 0; l < problem.num_devices(); ++l) {
    g[l] = problem.coeffs.U2(problem.assignment.subcarrier_of[l], l);
  }
  return g;
}

void check_shapes(const Problem& problem, const Allocation& a) {
  if (a.p_tilde.size() != static_cast<std::size_t>(problem.num_subcarriers()) ||
      a.rho.size() != static_cast<std::size_t>(problem.num_devices()) ||
      a.t.size() != static_cast<std::size_t>(problem.num_devices())) {
    throw DomainError("allocation shape does not match the problem");
  }
}

DualState derived_duals(const detail::Model& m, const detail::PointEval& ev, const std::vector<double>& lambda,
                        double eta, int k) {
  DualState d;
  d.lambda = lambda;
  d.gamma = lambda;
  d.mu.resize(m.L());
  d.nu.resize(m.L());
  for (int l = 0; l < m.L(); ++l) {
    d.mu[l] = lambda[l] * ev.uplink[l] * ev.slope[l];
    d.nu[l] = lambda[l] * kDbToNeper * ev.uplink[l];
  }
  d.eta = eta;
  d.step_index = k;
  return d;
}

void validate_restriction(const Restriction& r, const CodeParams& code) {
  if (r.fixed_rho && !(*r.fixed_rho >= 0.0 && *r.fixed_rho <= 1.0)) {
    throw ConfigError("restriction: fixed rho must lie in [0, 1]");
  }
  if (r.fixed_t_db) {
    if (!std::isfinite(*r.fixed_t_db)) throw ConfigError("restriction: fixed t must be finite");
  }
  (void)code;
}

}  // namespace

Problem make_problem(ChannelRealization realization, Assignment assignment, double kappa, CodeParams code,
                     double total_power) {
  if (assignment.num_devices() != realization.num_devices ||
      assignment.num_subcarriers != realization.num_subcarriers) {
    throw ConfigError("assignment does not match the realization's dimensions");
  }
  if (auto err = validate_assignment(assignment)) throw ConfigError(*err);
  if (const auto errs = validate(code); !errs.empty()) throw ConfigError(errs.front());
  if (!(total_power >= 0.0) || !std::isfinite(total_power)) {
    throw ConfigError("total_feedback_power: finite P_total >= 0 required");
  }
  Problem p;
  p.coeffs = coefficients(realization, kappa);
  p.device_of = assignment.device_of();
  p.realization = std::move(realization);
  p.assignment = std::move(assignment);
  p.code = code;
  p.total_power = total_power;
  return p;
}

std::vector<std::string> validate(const SolverConfig& c) {
  std::vector<std::string> errors;
  if (c.max_outer_iters < 1) errors.emplace_back("solver.max_outer_iters: >= 1 required");
  if (!(c.step_a0 > 0.0)) errors.emplace_back("solver.step_a0: a0 > 0 required");
  if (!(c.step_decay > 0.0 && c.step_decay <= 1.0)) errors.emplace_back("solver.step_decay: (0, 1] required");
  if (!(c.tolerance > 0.0)) errors.emplace_back("solver.tolerance: > 0 required");
  if (c.patience < 1) errors.emplace_back("solver.patience: >= 1 required");
  if (!(c.t_guard_db > 0.0)) errors.emplace_back("solver.t_guard_db: ε_t > 0 required");
  if (!(c.init_rho >= 0.0 && c.init_rho <= 1.0)) errors.emplace_back("solver.init_rho: [0, 1] required");
  if (!(c.init_multiplier > 0.0)) errors.emplace_back("solver.init_multiplier: > 0 required");
  if (!(c.power_cap_w >= 0.0)) errors.emplace_back("solver.power_cap_w: >= 0 required");
  return errors;
}

std::vector<double> effective_feedback_snr_db(const Problem& problem, const Allocation& a) {
  const auto g = own_gain(problem);
  std::vector<double> out(problem.num_devices());
  for (int l = 0; l < problem.num_devices(); ++l) {
    const double lin = a.p_tilde[problem.assignment.subcarrier_of[l]] * (1.0 - a.rho[l]) * g[l];
    out[l] = lin > 0.0 ? 10.0 * std::log10(lin) : -kInf;
  }
  return out;
}

std::vector<double> received_rf_power(const Problem& problem, const Allocation& a) {
  std::vector<double> out(problem.num_devices(), 0.0);
  for (int s = 0; s < problem.num_subcarriers(); ++s) {
    if (problem.device_of[s] < 0) continue;
    for (int l = 0; l < problem.num_devices(); ++l) {
      out[l] += a.p_tilde[s] * problem.realization.downlink_gain(s, l);
    }
  }
  return out;
}

NetPower net_power(const Problem& problem, const Allocation& a) {
  check_shapes(problem, a);
  const auto rf = received_rf_power(problem, a);
  NetPower out;
  out.per_device.resize(problem.num_devices());
  out.max = -kInf;
  for (int l = 0; l < problem.num_devices(); ++l) {
    out.per_device[l] = required_uplink_power_w(a.t[l], problem.coeffs.U0[l]) -
                        a.rho[l] * problem.coeffs.kappa * rf[l];
    out.max = std::max(out.max, out.per_device[l]);
  }
  return out;
}

std::vector<double> tighten_t(const Problem& problem, const Allocation& a, double guard_db) {
  const detail::FeedbackLaw law(problem.code, guard_db);
  const auto x = effective_feedback_snr_db(problem, a);
  std::vector<double> t(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) t[l] = law.tightened_t(x[l]);
  return t;
}

AllocationSolution evaluate(const Problem& problem, const Allocation& a) {
  check_shapes(problem, a);
  AllocationSolution sol;
  sol.allocation = a;
  sol.feedback_snr_db = effective_feedback_snr_db(problem, a);
  sol.received_rf = received_rf_power(problem, a);
  const int L = problem.num_devices();
  sol.uplink_power.resize(L);
  sol.harvested_power.resize(L);
  sol.net_power.resize(L);
  sol.r = -kInf;
  for (int l = 0; l < L; ++l) {
    sol.uplink_power[l] = required_uplink_power_w(a.t[l], problem.coeffs.U0[l]);
    sol.harvested_power[l] = a.rho[l] * problem.coeffs.kappa * sol.received_rf[l];
    sol.net_power[l] = sol.uplink_power[l] - sol.harvested_power[l];
    sol.r = std::max(sol.r, sol.net_power[l]);
  }
  return sol;
}

PowerUpdate update_power(const DualState& d, const Problem& problem, const Allocation& a,
                         const SolverConfig& config) {
  PowerUpdate out;
  out.p_tilde.assign(problem.num_subcarriers(), 0.0);
  const double cap = config.power_cap_w > 0.0 ? config.power_cap_w : problem.total_power;
  const double mu_total = sum(d.mu);
  for (int s = 0; s < problem.num_subcarriers(); ++s) {
    const int owner = problem.device_of[s];
    if (owner < 0) continue;
    double denom = d.eta;
    for (int l = 0; l < problem.num_devices(); ++l) denom -= d.lambda[l] * a.rho[l] * problem.coeffs.U1(s, l);
    const double num = config.power_numerator == PowerNumerator::assigned_device ? d.mu[owner] : mu_total;
    if (!(denom > 0.0)) {
      out.p_tilde[s] = cap;
      ++out.degenerate;
      continue;
    }
    out.p_tilde[s] = std::max(0.0, num / denom);
  }
  return out;
}

std::vector<double> update_rho(const DualState& d, const Problem& problem, const Allocation& a) {
  std::vector<double> rho(problem.num_devices());
  for (int l = 0; l < problem.num_devices(); ++l) {
    double harvest = 0.0;
    for (int s = 0; s < problem.num_subcarriers(); ++s) {
      if (problem.device_of[s] >= 0) harvest += problem.coeffs.U1(s, l) * a.p_tilde[s];
    }
    const double denom = d.lambda[l] * harvest;
    rho[l] = denom > 0.0 ? std::clamp(1.0 - d.mu[l] / denom, 0.0, 1.0) : 0.0;
  }
  return rho;
}

DualState dual_step(const DualState& d, const Problem& problem, const Allocation& a, double r,
                    const SolverConfig& config, double residual_scale) {
  if (d.step_index < 1) throw DomainError("dual_step: step index k >= 1 required");
  if (!(residual_scale > 0.0)) throw DomainError("dual_step: residual scale must be positive");
  const double step = config.step_a0 / std::pow(static_cast<double>(d.step_index), config.step_decay);
  const auto net = net_power(problem, a);
  const auto res = constraint_residuals(problem, a);
  const detail::FeedbackLaw law(problem.code, config.t_guard_db);
  const auto x = effective_feedback_snr_db(problem, a);
  DualState out = d;
  for (int l = 0; l < problem.num_devices(); ++l) {
    const double g = (net.per_device[l] - r) / residual_scale;
    out.lambda[l] = std::max(0.0, d.lambda[l] + step * g);
    out.gamma[l] = std::max(0.0, d.gamma[l] + step * g);
    // Constraint values are the negated slacks (<= 0 when satisfied).
    const double log_res = res.t_log_in_domain[l] ? -res.t_log_slack[l] : 0.0;
    out.mu[l] = std::max(0.0, d.mu[l] + step * log_res);
    out.nu[l] = std::max(0.0, d.nu[l] + step * (law.tightened_t(x[l]) - a.t[l]));
  }
  out.eta = std::max(0.0, d.eta + step * (sum(a.p_tilde) - problem.total_power));
  out.step_index = d.step_index + 1;
  return out;
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  if (v.empty()) return v;
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double th = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - th > 0.0) theta = th;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

SolveResult solve(const Problem& problem, const SolverConfig& config, const Restriction& restriction) {
  if (const auto errs = validate(config); !errs.empty()) {
    std::ostringstream msg;
    msg << "invalid solver config:";
    for (const auto& e : errs) msg << "\n  " << e;
    throw ConfigError(msg.str());
  }
  validate_restriction(restriction, problem.code);

  const detail::Model m(problem, restriction, config.t_guard_db);
  const int L = m.L();
  const int S = m.S();
  const double P = problem.total_power;

  std::vector<double> p(S, 0.0);
  for (int s = 0; s < S; ++s)
    if (problem.device_of[s] >= 0) p[s] = P / L;
  std::vector<double> rho(L, restriction.fixed_rho.value_or(config.init_rho));

  SolveResult result;
  detail::PointEval ev;
  auto finish = [&](const std::vector<double>& pp, const std::vector<double>& rr, const std::vector<double>& lam,
                    double eta, int k) {
    m.evaluate(pp, rr, ev);
    Allocation alloc{pp, rr, ev.t_db};
    result.solution = evaluate(problem, alloc);
    result.solution.optimal_rho = 0.0;
    for (int l = 0; l < L; ++l) result.solution.optimal_rho += lam[l] * rr[l];
    result.duals = derived_duals(m, ev, lam, eta, k);
  };

  if (!(P > 0.0)) {
    for (int l = 0; l < L; ++l) rho[l] = restriction.fixed_rho.value_or(0.0);
    finish(p, rho, std::vector<double>(L, 1.0 / L), 0.0, 1);
    result.solution.converged = true;
    return result;
  }

  auto rho_block = [&](const std::vector<double>& pp, std::vector<double>& rr) {
    if (m.rho_fixed()) return;
    for (int l = 0; l < L; ++l) rr[l] = m.best_rho(l, pp[m.own(l)], m.rf(l, pp));
  };
  // Log-sum-exp smoothing of max_l net_l; the weights are the epigraph multipliers.
  auto smoothed = [&](const detail::PointEval& e, double tau, std::vector<double>& w) {
    double z = 0.0;
    w.resize(L);
    for (int l = 0; l < L; ++l) z += (w[l] = std::exp((e.net[l] - e.r) / tau));
    for (double& v : w) v /= z;
    return e.r + tau * std::log(z);
  };

  // Objective scale from the uniform start; fixes the smoothing temperatures for every start.
  rho_block(p, rho);
  m.evaluate(p, rho, ev);
  double scale = 0.0;
  for (int l = 0; l < L; ++l) scale = std::max({scale, std::abs(ev.net[l]), ev.uplink[l]});

  struct Candidate {
    std::vector<double> p, rho, lambda;
    double eta = 0.0;
    double r = kInf;
    int k = 0;
    bool certified = false;
    std::string reason;
  };
  int k = 0;

  auto descend = [&](std::vector<double> p, std::vector<double> rho) {
    Candidate best;
    rho_block(p, rho);
    m.evaluate(p, rho, ev);
    std::vector<double> w, w_new, grad(S, 0.0), p_new(S), rho_new(L);
    detail::PointEval ev_new;
    double tau = kSmoothStart * scale;
    double alpha = 1.0;
    smoothed(ev, tau, w);
    best = {p, rho, w, 0.0, ev.r, k, false, {}};
    while (true) {
      double F = smoothed(ev, tau, w);
      alpha = std::max(alpha, 1.0);  // a failed line search on the previous level must not carry over
      int quiet = 0;
      bool level_done = false;
      while (!level_done && k < config.max_outer_iters) {
        ++k;
        // Exponentiated-gradient step on the budget face, exact splitting response after it.
        for (int s = 0; s < S; ++s) {
          const int owner = m.device_on(s);
          if (owner < 0) continue;
          double g = 0.0;
          for (int l = 0; l < L; ++l) g -= w[l] * rho[l] * m.kappa() * m.gain(s, l);
          if (p[s] > 0.0) g -= w[owner] * ev.uplink[owner] * ev.slope[owner] / p[s];
          grad[s] = g * P / scale;
        }
        double eta = 0.0;
        double gmin = kInf;
        for (int s = 0; s < S; ++s) {
          eta -= p[s] * grad[s] / P;
          if (m.device_on(s) >= 0) gmin = std::min(gmin, grad[s]);
        }
        // Frank-Wolfe gap of the smoothed objective on the budget face, in W.
        const double fw_gap = (-eta - gmin) * scale;
        eta *= scale / P;
        if (fw_gap <= config.tolerance * std::max(std::abs(F), tau)) break;

        bool accepted = false;
        double F_new = F;
        for (int tries = 0; tries < 60 && !accepted; ++tries) {
          double z = 0.0;
          for (int s = 0; s < S; ++s) {
            p_new[s] = m.device_on(s) >= 0 ? p[s] * std::exp(-alpha * (grad[s] - gmin)) : 0.0;
            z += p_new[s];
          }
          for (double& v : p_new) v *= P / z;
          rho_new = rho;
          rho_block(p_new, rho_new);
          m.evaluate(p_new, rho_new, ev_new);
          F_new = smoothed(ev_new, tau, w_new);
          if (F_new < F) {
            accepted = true;
          } else {
            alpha *= 0.25;
          }
        }
        if (!accepted) break;
        const double decrease = F - F_new;
        std::swap(p, p_new);
        std::swap(rho, rho_new);
        std::swap(ev, ev_new);
        std::swap(w, w_new);
        F = F_new;
        alpha = std::min(alpha * 2.0, 1e6);

        if (ev.r < best.r) best = {p, rho, w, eta, ev.r, k, false, {}};
        // Steps that realise almost none of the remaining gap mean the level has stalled.
        if (decrease <= 1e-3 * fw_gap) {
          if (++quiet >= config.patience) level_done = true;
        } else {
          quiet = 0;
        }

        if (config.record_trace) {
          TraceRecord tr;
          tr.iter = k;
          tr.r_watt = ev.r;
          tr.power_slack = P - sum(p);
          double tres = -kInf;
          for (int l = 0; l < L; ++l) tres = std::max(tres, m.t_of(ev.x_db[l]) - ev.t_db[l]);
          tr.max_t_residual_db = tres;
          tr.lambda_max = *std::max_element(w.begin(), w.end());
          tr.active_devices =
              static_cast<int>(std::count_if(w.begin(), w.end(), [](double v) { return v > 1e-3; }));
          for (int l = 0; l < L; ++l) tr.mu_sum += w[l] * ev.uplink[l] * ev.slope[l];
          tr.eta = eta;
          result.trace.push_back(tr);
        }
      }
      if (k >= config.max_outer_iters) break;
      if (tau <= kSmoothEnd * scale) break;
      tau *= kSmoothFactor;
    }

    // The best iterate may date from a coarse level; its weights are re-taken at the finest one.
    m.evaluate(best.p, best.rho, ev);
    smoothed(ev, kSmoothEnd * scale, best.lambda);
    const detail::RefineResult ref = detail::refine(m, best.p, best.rho, best.lambda, best.r + 1e-12 * scale);
    if (ref.certified) {
      best = {ref.p, ref.rho, ref.lambda, ref.eta, ref.r, best.k, true, {}};
    } else {
      best.reason = ref.reason;
    }
    return best;
  };

  // Candidates within 1e-12 of the best objective count as ties; a certified one wins a tie.
  Candidate chosen = descend(p, rho);
  auto consider = [&](Candidate c) {
    const double tie = 1e-12 * scale;
    if (c.r < chosen.r - tie || (c.r <= chosen.r + tie && c.certified && !chosen.certified)) {
      chosen = std::move(c);
    }
  };
  if (!m.rho_fixed()) {
    // The rho = 0 face is the coding-only problem; starting from its optimum keeps the joint
    // solution at least as good as that restriction.
    Restriction coding_only = restriction;
    coding_only.fixed_rho = 0.0;
    SolverConfig sub = config;
    sub.record_trace = false;
    const SolveResult face = solve(problem, sub, coding_only);
    k += face.solution.iterations;
    consider(descend(face.solution.allocation.p_tilde, face.solution.allocation.rho));
  }
  if (!chosen.certified && !m.rho_fixed()) {
    // Harvest-first start for the WPT-dominated regime.
    consider(descend(p, std::vector<double>(L, 1.0)));
  }

  finish(chosen.p, chosen.rho, chosen.lambda, chosen.eta, chosen.k);
  result.refined = chosen.certified;
  result.refine_status = chosen.reason;
  result.solution.converged = result.refined;
  result.solution.iterations = k;
  return result;
}

ConstraintResiduals constraint_residuals(const Problem& problem, const Allocation& a) {
  check_shapes(problem, a);
  const CodeParams& code = problem.code;
  ConstraintResiduals out;
  out.power_slack = problem.total_power - sum(a.p_tilde);
  const auto x = effective_feedback_snr_db(problem, a);
  const auto g = own_gain(problem);
  const int L = problem.num_devices();
  out.rho_slack.resize(L);
  out.t_direct_slack.resize(L);
  out.t_log_slack.resize(L);
  out.t_log_in_domain.resize(L);
  for (int l = 0; l < L; ++l) {
    out.rho_slack[l] = std::min(a.rho[l], 1.0 - a.rho[l]);
    out.t_direct_slack[l] = a.t[l] - critical_uplink_snr_db(x[l], code);
    const double t = a.t[l];
    const bool in_domain = t > code.t_floor() && t < code.t_ceiling() && std::isfinite(x[l]);
    out.t_log_in_domain[l] = in_domain;
    if (in_domain) {
      const double lin = a.p_tilde[problem.assignment.subcarrier_of[l]] * (1.0 - a.rho[l]) * g[l];
      out.t_log_slack[l] = std::log(lin) - required_log_feedback_snr(t, code);
    } else {
      out.t_log_slack[l] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

double lagrangian(const Problem& problem, const Allocation& a, double r, const DualState& d) {
  const auto rf = received_rf_power(problem, a);
  const auto g = own_gain(problem);
  double value = r;
  for (int l = 0; l < problem.num_devices(); ++l) {
    const double net = required_uplink_power_w(a.t[l], problem.coeffs.U0[l]) - a.rho[l] * problem.coeffs.kappa * rf[l];
    value += d.lambda[l] * (net - r);
    if (d.mu[l] > 0.0) {
      const double lin = a.p_tilde[problem.assignment.subcarrier_of[l]] * (1.0 - a.rho[l]) * g[l];
      value += d.mu[l] * (required_log_feedback_snr(a.t[l], problem.code) - std::log(lin));
    }
  }
  value += d.eta * (sum(a.p_tilde) - problem.total_power);
  return value;
}

KktReport kkt_report(const Problem& problem, const AllocationSolution& sol, const DualState& d, double guard) {
  const Allocation& a = sol.allocation;
  check_shapes(problem, a);
  const int L = problem.num_devices();
  const int S = problem.num_subcarriers();
  const double P = problem.total_power;
  KktReport k;
  const auto net = net_power(problem, a);
  double scale = std::abs(net.max);
  for (int l = 0; l < L; ++l) scale = std::max(scale, required_uplink_power_w(a.t[l], problem.coeffs.U0[l]));
  if (!(scale > 0.0)) scale = 1.0;
  k.scale = scale;
  const double r = net.max;

  const double total = sum(a.p_tilde);
  k.power_violation = std::max(0.0, total - P);
  for (int l = 0; l < L; ++l) {
    k.rho_violation = std::max({k.rho_violation, -a.rho[l], a.rho[l] - 1.0});
  }
  const auto x = effective_feedback_snr_db(problem, a);
  const detail::FeedbackLaw law(problem.code, guard);
  for (int l = 0; l < L; ++l) {
    k.max_t_residual_db = std::max(k.max_t_residual_db, law.tightened_t(x[l]) - a.t[l]);
  }

  k.min_multiplier = d.eta;
  double lsum = 0.0;
  for (int l = 0; l < L; ++l) {
    k.min_multiplier = std::min({k.min_multiplier, d.lambda[l], d.mu[l], d.gamma[l], d.nu[l]});
    lsum += d.lambda[l];
  }
  k.simplex_residual = std::abs(1.0 - lsum);

  const auto res = constraint_residuals(problem, a);
  double cs = std::abs(d.eta * res.power_slack) / scale;
  for (int l = 0; l < L; ++l) {
    cs = std::max(cs, std::abs(d.lambda[l] * (r - net.per_device[l])) / scale);
    cs = std::max(cs, std::abs(d.nu[l] * (a.t[l] - law.tightened_t(x[l]))) / scale);
    if (d.mu[l] > 0.0 && res.t_log_in_domain[l]) cs = std::max(cs, std::abs(d.mu[l] * res.t_log_slack[l]) / scale);
  }
  k.max_comp_slackness = cs;

  auto L_at = [&](const Allocation& al) { return lagrangian(problem, al, r, d); };
  Allocation w = a;

  for (int s = 0; s < S; ++s) {
    if (problem.device_of[s] < 0) continue;
    const double v = a.p_tilde[s];
    double gap;
    if (v > 0.0) {
      const double h = 1e-6 * v;
      w.p_tilde[s] = v + h;
      const double up = L_at(w);
      w.p_tilde[s] = v - h;
      const double dn = L_at(w);
      gap = std::abs((up - dn) / (2.0 * h));
    } else {
      const double h = 1e-9 * std::max(P, 1e-300);
      w.p_tilde[s] = h;
      const double up = L_at(w);
      w.p_tilde[s] = v;
      const double g = (up - L_at(w)) / h;
      gap = std::isfinite(g) ? std::max(0.0, -g) : 0.0;
    }
    w.p_tilde[s] = v;
    k.max_power_stationarity = std::max(k.max_power_stationarity, gap * P / scale);
  }

  for (int l = 0; l < L; ++l) {
    const double v = a.rho[l];
    const double h = 1e-7;
    double gap;
    if (v >= h && v <= 1.0 - h) {
      w.rho[l] = v + h;
      const double up = L_at(w);
      w.rho[l] = v - h;
      const double dn = L_at(w);
      gap = std::abs((up - dn) / (2.0 * h));
    } else if (v < h) {
      const double base = L_at(w);
      w.rho[l] = v + h;
      gap = std::max(0.0, -(L_at(w) - base) / h);
    } else {
      const double base = L_at(w);
      w.rho[l] = v - h;
      gap = std::max(0.0, (L_at(w) - base) / h);
    }
    w.rho[l] = v;
    if (std::isfinite(gap)) k.max_rho_stationarity = std::max(k.max_rho_stationarity, gap / scale);
  }

  const double lo = problem.code.t_floor() + guard;
  const double hi = problem.code.t_ceiling() - guard;
  for (int l = 0; l < L; ++l) {
    const double v = a.t[l];
    const double h = 1e-7;
    double g;
    if (v - h > problem.code.t_floor() && v + h < problem.code.t_ceiling()) {
      w.t[l] = v + h;
      const double up = L_at(w);
      w.t[l] = v - h;
      const double dn = L_at(w);
      g = (up - dn) / (2.0 * h);
    } else {
      g = 0.0;
    }
    w.t[l] = v;
    // On either clamp t sits at the lower end of its feasible range: projected check.
    const double gap = (v <= lo + 1e-12 || v >= hi - 1e-12) ? std::max(0.0, -g) : std::abs(g);
    k.max_t_stationarity = std::max(k.max_t_stationarity, gap / scale);

    if (d.gamma[l] > 0.0) {
      const double lhs = std::pow(10.0, v / 10.0);
      const double rhs = 10.0 * d.nu[l] / (d.gamma[l] * problem.coeffs.U0[l] * std::numbers::ln10);
      k.t_identity_mismatch = std::max(k.t_identity_mismatch, std::abs(lhs - rhs) / lhs);
    }
  }
  return k;
}

}  // namespace facet
