#include "facet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "facet/error.hpp"
#include "facet/simd/mesh_kernel.hpp"

namespace facet {
namespace {

struct PointBest {
  double value = std::numeric_limits<double>::infinity();
  int index = -1;
};

}  // namespace

std::vector<std::string> validate(const GridSpec& grid) {
  std::vector<std::string> errs;
  if (grid.power_points < 100) errs.push_back("power_points must be at least 100");
  if (grid.rho_points < 100) errs.push_back("rho_points must be at least 100");
  if (grid.max_evaluations < 1 || grid.max_evaluations > 100'000'000) {
    errs.push_back("max_evaluations must lie in [1, 1e8]");
  }
  if (grid.threads < 0) errs.push_back("threads must be >= 0");
  return errs;
}

OracleResult grid_search(const Problem& problem, const GridSpec& grid, double guard_db) {
  if (const auto errs = validate(grid); !errs.empty()) {
    std::ostringstream msg;
    msg << "invalid grid:";
    for (const auto& e : errs) msg << "\n  " << e;
    throw ConfigError(msg.str());
  }
  const int L = problem.num_devices();
  const int S = problem.num_subcarriers();
  if (L < 1 || L > 2 || S > 3) throw DomainError("oracle handles only L <= 2 and S <= 3");
  const double P = problem.total_power;

  std::vector<int> cols;
  for (int s = 0; s < S; ++s)
    if (problem.device_of[s] >= 0) cols.push_back(s);
  // One assigned subcarrier (or no budget) leaves a single point on the budget face.
  const int np = (cols.size() == 2 && P > 0.0) ? grid.power_points : 1;
  const int nr = grid.rho_points;
  const std::int64_t evaluations = static_cast<std::int64_t>(np) * L * nr;
  if (evaluations > grid.max_evaluations) {
    throw ConfigError("oracle mesh needs " + std::to_string(evaluations) + " evaluations, limit " +
                      std::to_string(grid.max_evaluations));
  }

  const CodeParams& c = problem.code;
  const simd::LawConstants law{c.u0, c.u1, c.u2, c.u3, c.u0 + guard_db, c.u0 + 1.0 / c.u3 - guard_db};
  std::vector<double> rho(nr), log1m(nr);
  for (int j = 0; j < nr; ++j) {
    rho[j] = static_cast<double>(j) / (nr - 1);
    log1m[j] = j == nr - 1 ? -std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 - rho[j]);
  }

  auto powers = [&](int i) {
    std::vector<double> p(S, 0.0);
    if (cols.size() == 2) {
      p[cols[0]] = np == 1 ? 0.5 * P : P * static_cast<double>(i) / (np - 1);
      p[cols[1]] = P - p[cols[0]];
    } else if (cols.size() == 1) {
      p[cols[0]] = P;
    }
    return p;
  };
  auto device_min = [&](const std::vector<double>& p, int l) {
    const int own = problem.assignment.subcarrier_of[l];
    const double lin = p[own] * problem.coeffs.U2(own, l);
    const double a = lin > 0.0 ? 10.0 * std::log10(lin) : -std::numeric_limits<double>::infinity();
    double h = 0.0;
    for (int s : cols) h += p[s] * problem.realization.downlink_gain(s, l);
    return simd::mesh_min(law, a, problem.coeffs.U0[l], problem.coeffs.kappa * h, rho.data(), log1m.data(), nr);
  };
  auto objective = [&](int i) {
    const auto p = powers(i);
    double worst = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < L; ++l) worst = std::max(worst, device_min(p, l).value);
    return worst;
  };

  int threads = grid.threads > 0 ? grid.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, np / 64));
  std::vector<PointBest> chunk_best(threads);
  auto work = [&](int t) {
    const int begin = static_cast<int>(static_cast<std::int64_t>(np) * t / threads);
    const int end = static_cast<int>(static_cast<std::int64_t>(np) * (t + 1) / threads);
    PointBest b;
    for (int i = begin; i < end; ++i) {
      const double v = objective(i);
      if (v < b.value) b = {v, i};
    }
    chunk_best[t] = b;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  // Chunks are in index order, so a strict comparison keeps the smallest index on ties.
  PointBest best;
  for (const auto& b : chunk_best)
    if (b.index >= 0 && b.value < best.value) best = b;

  OracleResult out;
  out.resolution = grid;
  out.resolution.power_points = np;
  out.evaluations = evaluations;
  out.objective_watt = best.value;
  out.argmin.p_tilde = powers(best.index);
  out.argmin.rho.resize(L);
  out.argmin.t.resize(L);
  out.net_power.resize(L);
  for (int l = 0; l < L; ++l) {
    const auto m = device_min(out.argmin.p_tilde, l);
    out.argmin.rho[l] = rho[m.index];
    out.net_power[l] = m.value;
    const int own = problem.assignment.subcarrier_of[l];
    const double x = 10.0 * std::log10(out.argmin.p_tilde[own] * (1.0 - rho[m.index]) * problem.coeffs.U2(own, l));
    out.argmin.t[l] = std::clamp(c.u0 + 1.0 / (std::exp(c.u1 + c.u2 * x) + c.u3), law.t_lo, law.t_hi);
  }
  return out;
}

JointResult joint_exhaustive(const ChannelRealization& realization, double kappa, const CodeParams& code,
                             double total_power, const GridSpec& grid, double guard_db) {
  const int L = realization.num_devices;
  const int S = realization.num_subcarriers;
  if (L < 1 || L > 2 || S > 3 || S < L) throw DomainError("joint oracle handles only L <= 2, L <= S <= 3");
  JointResult out;
  bool have = false;
  std::vector<int> sub(L, 0);
  // Lexicographic enumeration of injective maps.
  while (true) {
    bool injective = true;
    for (int a = 0; a < L; ++a)
      for (int b = a + 1; b < L; ++b) injective = injective && sub[a] != sub[b];
    if (injective) {
      Assignment as{sub, S};
      const Problem pb = make_problem(realization, as, kappa, code, total_power);
      OracleResult r = grid_search(pb, grid, guard_db);
      out.per_assignment.emplace_back(as, r.objective_watt);
      if (!have || r.objective_watt < out.oracle.objective_watt) {
        out.assignment = as;
        out.oracle = std::move(r);
        have = true;
      }
    }
    int k = L - 1;
    while (k >= 0 && ++sub[k] == S) sub[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

nlohmann::json to_json(const OracleResult& r) {
  return {{"objective_watt", r.objective_watt},
          {"argmin", {{"p_tilde", r.argmin.p_tilde}, {"rho", r.argmin.rho}, {"t_db", r.argmin.t}}},
          {"resolution", {{"power_points", r.resolution.power_points}, {"rho_points", r.resolution.rho_points}}},
          {"evaluations", r.evaluations}};
}

}  // namespace facet
