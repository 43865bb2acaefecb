#include "facet/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "facet/assign.hpp"
#include "facet/error.hpp"
#include "facet/oracle.hpp"
#include "facet/rng.hpp"
#include "facet/units.hpp"
#include "json.hpp"

namespace facet {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// Budget, bounds, unassigned subcarriers dark and a finite objective.
bool feasible(const Problem& problem, const AllocationSolution& sol) {
  if (!std::isfinite(sol.r)) return false;
  double sum = 0.0;
  const auto& a = sol.allocation;
  for (int s = 0; s < problem.num_subcarriers(); ++s) {
    const double p = a.p_tilde[s];
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    if (problem.device_of[s] < 0 && p != 0.0) return false;
    sum += p;
  }
  if (sum > problem.total_power * (1.0 + 1e-9)) return false;
  for (double rho : a.rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) return false;
  }
  return true;
}

struct Job {
  int trial;
  int p_index;
  int k_index;
};

std::vector<TrialRecord> run_job(const SweepConfig& config, const Job& job) {
  const double p_dbm = config.p_total_grid_dbm[job.p_index];
  const double kappa = config.kappa_grid[job.k_index];
  const std::uint64_t seed = config.scenario.seed + static_cast<std::uint64_t>(job.trial);

  std::vector<TrialRecord> out;
  for (const auto& scheme : config.schemes) {
    TrialRecord rec;
    rec.scheme = scheme;
    rec.p_total_dbm = p_dbm;
    rec.kappa = kappa;
    rec.trial = job.trial;
    rec.seed = seed;
    rec.r_watt = kNaN;
    rec.optimal_rho = kNaN;
    out.push_back(rec);
  }
  try {
    ScenarioConfig sc = config.scenario;
    sc.seed = seed;
    sc.total_feedback_power = units::dbm_to_watt(p_dbm);
    sc.harvest_efficiency = kappa;
    const ChannelRealization realization = generate(sc);
    Assignment assignment = hungarian_max(gain_matrix(realization));
    const Problem problem = make_problem(realization, std::move(assignment), kappa, config.code,
                                         sc.total_feedback_power);
    for (auto& rec : out) {
      try {
        SolveResult res;
        if (rec.scheme == "facet") {
          res = solve(problem, config.solver);
        } else if (rec.scheme == "fca_iot") {
          res = solve_fca_iot(problem, config.solver);
        } else {
          res = solve_fixed_split_wpt(problem, scheme_spec(config, rec.scheme), config.solver);
        }
        const auto& sol = res.solution;
        rec.r_watt = sol.r;
        rec.optimal_rho = sol.optimal_rho;
        rec.iterations = sol.iterations;
        rec.converged = sol.converged;
        rec.feasible = feasible(problem, sol);
        rec.status = rec.feasible ? res.refine_status : "infeasible output";
      } catch (const std::exception& e) {
        rec.status = std::string("error: ") + e.what();
      }
    }
  } catch (const std::exception& e) {
    for (auto& rec : out) rec.status = std::string("error: ") + e.what();
  }
  return out;
}

bool record_less(const TrialRecord& a, const TrialRecord& b) {
  if (a.scheme != b.scheme) return a.scheme < b.scheme;
  if (a.p_total_dbm != b.p_total_dbm) return a.p_total_dbm < b.p_total_dbm;
  if (a.kappa != b.kappa) return a.kappa < b.kappa;
  return a.trial < b.trial;
}

const char* display_name(const std::string& scheme) {
  if (scheme == "facet") return "FACET";
  if (scheme == "fca_iot") return "FCA-IoT";
  if (scheme == "polar_wpt") return "Polar-WPT";
  if (scheme == "turbo_wpt") return "Turbo-WPT";
  return scheme.c_str();
}

}  // namespace

const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> names{"facet", "fca_iot", "polar_wpt", "turbo_wpt"};
  return names;
}

std::vector<std::string> validate(const SweepConfig& c) {
  std::vector<std::string> errors;
  for (auto& e : validate(c.scenario)) errors.push_back("scenario." + e);
  for (auto& e : validate(c.code)) errors.push_back(e);
  for (auto& e : validate(c.solver)) errors.push_back(e);
  for (const auto& [name, spec] : c.baselines) {
    if (name != "polar_wpt" && name != "turbo_wpt") {
      errors.push_back("baselines." + name + ": only polar_wpt and turbo_wpt take parameters");
    }
    if (spec.name != name) errors.push_back("baselines." + name + ": spec name mismatch");
    for (auto& e : validate(spec)) errors.push_back("baselines." + name + ": " + e);
  }
  if (c.p_total_grid_dbm.empty()) errors.emplace_back("p_total_grid_dbm: at least one value required");
  for (std::size_t i = 0; i < c.p_total_grid_dbm.size(); ++i) {
    if (!std::isfinite(c.p_total_grid_dbm[i])) {
      errors.push_back("p_total_grid_dbm: entry " + std::to_string(i) + " is not finite");
    }
  }
  if (c.kappa_grid.empty()) errors.emplace_back("kappa_grid: at least one value required");
  for (std::size_t i = 0; i < c.kappa_grid.size(); ++i) {
    const double k = c.kappa_grid[i];
    if (!(k > 0.0 && k < 1.0)) {
      errors.push_back("kappa_grid: entry " + std::to_string(i) + " (" + fmt("%g", k) + ") outside (0, 1)");
    }
  }
  for (std::size_t i = 0; i < c.schemes.size(); ++i) {
    const auto& s = c.schemes[i];
    const auto& known = known_schemes();
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      errors.push_back("schemes: unknown scheme '" + s + "' (expected facet, fca_iot, polar_wpt or turbo_wpt)");
    }
    if (std::count(c.schemes.begin(), c.schemes.end(), s) > 1 &&
        std::find(c.schemes.begin(), c.schemes.end(), s) - c.schemes.begin() != static_cast<long>(i)) {
      errors.push_back("schemes: '" + s + "' listed twice");
    }
  }
  auto duplicated = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
  };
  if (duplicated(c.p_total_grid_dbm)) errors.emplace_back("p_total_grid_dbm: duplicate values");
  if (duplicated(c.kappa_grid)) errors.emplace_back("kappa_grid: duplicate values");
  if (c.num_seeds < 1) errors.emplace_back("num_seeds: >= 1 required");
  if (c.threads < 0) errors.emplace_back("threads: >= 0 required");
  if (c.output.csv.empty()) errors.emplace_back("output.csv: path required");
  if (c.oracle.instances < 1) errors.emplace_back("oracle.instances: >= 1 required");
  if (c.oracle.power_points < 100) errors.emplace_back("oracle.power_points: >= 100 required");
  if (c.oracle.rho_points < 100) errors.emplace_back("oracle.rho_points: >= 100 required");
  if (!(c.oracle.tolerance > 0.0)) errors.emplace_back("oracle.tolerance: > 0 required");
  return errors;
}

BaselineSpec scheme_spec(const SweepConfig& config, const std::string& scheme) {
  auto it = config.baselines.find(scheme);
  if (it != config.baselines.end()) return it->second;
  return baseline_spec(scheme);
}

SweepCell aggregate(const std::vector<TrialRecord>& trials) {
  SweepCell cell;
  if (!trials.empty()) {
    cell.scheme = trials.front().scheme;
    cell.p_total_dbm = trials.front().p_total_dbm;
    cell.kappa = trials.front().kappa;
  }
  cell.trials = static_cast<int>(trials.size());
  double sum = 0.0, rho = 0.0, iters = 0.0;
  for (const auto& t : trials) {
    if (!t.feasible) ++cell.failed;
    if (!(t.feasible && t.converged)) continue;
    ++cell.converged;
    sum += t.r_watt;
    rho += t.optimal_rho;
    iters += t.iterations;
  }
  const int n = cell.converged;
  cell.converged_frac = cell.trials > 0 ? static_cast<double>(n) / cell.trials : 0.0;
  if (n == 0) {
    cell.net_w_mean = cell.net_w_std = cell.net_dbm_mean = cell.mean_rho = cell.mean_iters = kNaN;
    return cell;
  }
  cell.net_w_mean = sum / n;
  double sq = 0.0;
  for (const auto& t : trials) {
    if (t.feasible && t.converged) sq += (t.r_watt - cell.net_w_mean) * (t.r_watt - cell.net_w_mean);
  }
  cell.net_w_std = n > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
  cell.net_dbm_mean = cell.net_w_mean > 0.0 ? units::watt_to_dbm(cell.net_w_mean) : kNaN;
  cell.mean_rho = rho / n;
  cell.mean_iters = iters / n;
  return cell;
}

SweepResult run_sweep(const SweepConfig& config, int threads) {
  if (auto errors = validate(config); !errors.empty()) {
    std::string msg = "invalid sweep config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  std::vector<Job> jobs;
  for (int trial = 0; trial < config.num_seeds; ++trial) {
    for (int pi = 0; pi < static_cast<int>(config.p_total_grid_dbm.size()); ++pi) {
      for (int ki = 0; ki < static_cast<int>(config.kappa_grid.size()); ++ki) jobs.push_back({trial, pi, ki});
    }
  }

  int workers = threads > 0 ? threads : config.threads;
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, std::max<std::size_t>(1, jobs.size()));

  // Each job writes only its own slot, so the assembly below never depends on timing.
  std::vector<std::vector<TrialRecord>> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) slots[i] = run_job(config, jobs[i]);
  };
  if (!config.schemes.empty()) {
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }

  SweepResult result;
  for (auto& slot : slots) {
    for (auto& rec : slot) result.trials.push_back(std::move(rec));
  }
  std::sort(result.trials.begin(), result.trials.end(), record_less);
  for (std::size_t i = 0; i < result.trials.size();) {
    std::size_t j = i;
    const auto& head = result.trials[i];
    while (j < result.trials.size() && result.trials[j].scheme == head.scheme &&
           result.trials[j].p_total_dbm == head.p_total_dbm && result.trials[j].kappa == head.kappa) {
      ++j;
    }
    result.cells.push_back(aggregate({result.trials.begin() + static_cast<long>(i),
                                      result.trials.begin() + static_cast<long>(j)}));
    i = j;
  }
  return result;
}

std::string csv_header() {
  return "scheme,p_total_dbm,kappa,net_max_dbm_mean,net_max_w_mean,net_max_w_std,mean_rho,mean_iters,"
         "converged_frac";
}

std::string to_csv(const SweepResult& result) {
  std::string out = csv_header() + "\n";
  for (const auto& c : result.cells) {
    out += c.scheme;
    for (double v : {c.p_total_dbm, c.kappa, c.net_dbm_mean, c.net_w_mean, c.net_w_std, c.mean_rho, c.mean_iters,
                     c.converged_frac}) {
      out += "," + fmt("%.6g", v);
    }
    out += "\n";
  }
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace

void emit_csv(const SweepResult& result, const std::string& path) { write_file(path, to_csv(result)); }

std::string trials_jsonl(const SweepResult& result) {
  std::string out;
  for (const auto& t : result.trials) {
    nlohmann::json j{{"scheme", t.scheme},
                     {"p_total_dbm", t.p_total_dbm},
                     {"kappa", t.kappa},
                     {"trial", t.trial},
                     {"seed", t.seed},
                     {"r_watt", t.r_watt},
                     {"optimal_rho", t.optimal_rho},
                     {"iterations", t.iterations},
                     {"converged", t.converged},
                     {"feasible", t.feasible},
                     {"status", t.status}};
    out += j.dump() + "\n";
  }
  return out;
}

void emit_trials(const SweepResult& result, const std::string& path) { write_file(path, trials_jsonl(result)); }

std::vector<TrialRecord> parse_trials_jsonl(const std::string& text) {
  std::vector<TrialRecord> out;
  std::istringstream in(text);
  std::string line;
  // NaN objectives are written as null.
  auto number = [](const nlohmann::json& v) { return v.is_null() ? kNaN : v.get<double>(); };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    TrialRecord t;
    t.scheme = j.at("scheme").get<std::string>();
    t.p_total_dbm = j.at("p_total_dbm").get<double>();
    t.kappa = j.at("kappa").get<double>();
    t.trial = j.at("trial").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.r_watt = number(j.at("r_watt"));
    t.optimal_rho = number(j.at("optimal_rho"));
    t.iterations = j.at("iterations").get<int>();
    t.converged = j.at("converged").get<bool>();
    t.feasible = j.at("feasible").get<bool>();
    t.status = j.at("status").get<std::string>();
    out.push_back(std::move(t));
  }
  return out;
}

double percent_reduction(double from, double to) { return 100.0 * (from - to) / from; }

std::string compare_schemes(const SweepResult& result, double p_total_dbm, double kappa) {
  std::vector<const SweepCell*> columns;
  for (const char* name : {"polar_wpt", "turbo_wpt", "fca_iot", "facet"}) {
    for (const auto& c : result.cells) {
      if (c.scheme == name && same(c.p_total_dbm, p_total_dbm) && same(c.kappa, kappa)) columns.push_back(&c);
    }
  }
  if (columns.empty()) {
    std::string msg = "no results for P_total = " + fmt("%g", p_total_dbm) + " dBm, kappa = " + fmt("%g", kappa) +
                      "; available cells:";
    std::vector<std::pair<double, double>> cells;
    for (const auto& c : result.cells) cells.emplace_back(c.p_total_dbm, c.kappa);
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    if (cells.empty()) msg += " none";
    for (const auto& [p, k] : cells) msg += "\n  P_total " + fmt("%g", p) + " dBm, kappa " + fmt("%g", k);
    throw ConfigError(msg);
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Metric"};
  for (const auto* c : columns) head.emplace_back(display_name(c->scheme));
  rows.push_back(head);
  auto row = [&](const std::string& label, auto cell_text) {
    std::vector<std::string> r{label};
    for (const auto* c : columns) r.push_back(cell_text(*c));
    rows.push_back(std::move(r));
  };
  auto number = [](double v, const char* format) { return std::isnan(v) ? std::string("n/a") : fmt(format, v); };
  row("Net Max Power (dBm)", [&](const SweepCell& c) { return number(c.net_dbm_mean, "%.2f"); });
  row("Net Max Power (Watt)", [&](const SweepCell& c) { return number(c.net_w_mean, "%.4g"); });
  row("Optimal rho", [&](const SweepCell& c) -> std::string {
    if (c.scheme == "fca_iot") return "N/A";
    if (c.scheme == "polar_wpt" || c.scheme == "turbo_wpt") return "1.0 (fixed)";
    return number(c.mean_rho, "%.3f");
  });
  row("Converged", [](const SweepCell& c) { return std::to_string(c.converged) + "/" + std::to_string(c.trials); });

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  out << "P_total = " << fmt("%g", p_total_dbm) << " dBm, kappa = " << fmt("%g", kappa) << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "  " : "") << r[i] << std::string(width[i] - r[i].size(), ' ');
    }
    out << "\n";
  }

  const SweepCell* facet = nullptr;
  for (const auto* c : columns) {
    if (c->scheme == "facet") facet = c;
  }
  if (facet && columns.size() > 1) {
    out << "\nNet max power reduction of FACET:\n";
    for (const auto* c : columns) {
      if (c == facet) continue;
      const double pct = percent_reduction(c->net_w_mean, facet->net_w_mean);
      out << "  vs " << display_name(c->scheme) << ": "
          << (std::isfinite(pct) ? fmt("%.1f%%", pct) : std::string("n/a")) << "\n";
    }
    out << "  note: reductions use unrounded means; recomputing them from the rounded Watt row\n"
           "  can differ by several points (0.13 W -> 0.04 W reads as "
        << fmt("%.1f%%", percent_reduction(0.13, 0.04)) << ").\n";
  }
  return out.str();
}

OracleSuiteReport run_oracle_suite(const SweepConfig& config) {
  OracleSuiteReport report;
  Rng rng(config.oracle.seed);
  GridSpec grid;
  grid.power_points = config.oracle.power_points;
  grid.rho_points = config.oracle.rho_points;
  for (int i = 0; i < config.oracle.instances; ++i) {
    OracleCheck check;
    check.index = i;
    check.num_devices = rng.uniform() < 0.5 ? 1 : 2;
    check.num_subcarriers = std::min(3, check.num_devices + static_cast<int>(rng.uniform() * (4 - check.num_devices)));
    check.p_total_dbm = rng.uniform(36.0, 50.0);

    ScenarioConfig sc = config.scenario;
    sc.num_devices = check.num_devices;
    sc.num_subcarriers = check.num_subcarriers;
    sc.seed = config.oracle.seed * 1000003ULL + static_cast<std::uint64_t>(i);
    sc.total_feedback_power = units::dbm_to_watt(check.p_total_dbm);
    const auto realization = generate(sc);
    const Problem problem = make_problem(realization, hungarian_max(gain_matrix(realization)), sc.harvest_efficiency,
                                         config.code, sc.total_feedback_power);
    const auto start = std::chrono::steady_clock::now();
    const auto res = solve(problem, config.solver);
    const auto oracle = grid_search(problem, grid, config.solver.t_guard_db);
    check.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.solver_watt = res.solution.r;
    check.oracle_watt = oracle.objective_watt;
    check.converged = res.solution.converged;
    check.rel_error = std::abs(check.solver_watt - check.oracle_watt) / std::max(std::abs(check.oracle_watt), 1e-12);
    report.worst_rel_error = std::max(report.worst_rel_error, check.rel_error);
    report.checks.push_back(check);
  }
  report.passed = report.worst_rel_error < config.oracle.tolerance;
  return report;
}

}  // namespace facet
