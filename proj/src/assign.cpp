#include "facet/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "facet/error.hpp"

namespace facet {
namespace {

constexpr int kBruteForceMaxDevices = 8;

void check_matrix(const Matrix& m) {
  if (m.rows() < m.cols()) {
    throw InfeasibleError("assignment infeasible: S = " + std::to_string(m.rows()) +
                          " subcarriers < L = " + std::to_string(m.cols()) + " devices");
  }
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw DomainError("assignment: non-finite matrix entry");
    if (v < 0.0) throw DomainError("assignment: negative matrix entry");
  }
}

// Two optimal totals closer than this are treated as tied.
double tie_tolerance(const Matrix& m) {
  double largest = 0.0;
  for (double v : m.data()) largest = std::max(largest, v);
  return 1e-12 * largest * static_cast<double>(std::max<std::size_t>(1, m.cols()));
}

// Minimum-cost perfect matching on an n x n cost matrix (shortest augmenting paths with
// potentials, O(n^3)). Returns row_of_col[c] for each column.
std::vector<int> min_cost_square(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_of_col(n);
  for (int j = 1; j <= n; ++j) row_of_col[j - 1] = match[j] - 1;
  return row_of_col;
}

// Best total for the given devices restricted to the given free subcarriers.
// Devices are padded with zero-weight dummies up to a square problem.
double best_total(const Matrix& m, const std::vector<int>& devices, const std::vector<int>& free_subcarriers,
                  std::vector<int>* chosen = nullptr) {
  const int n = static_cast<int>(free_subcarriers.size());
  if (devices.empty()) return 0.0;
  double largest = 0.0;
  for (int s : free_subcarriers) {
    for (int l : devices) largest = std::max(largest, m(s, l));
  }
  // rows = subcarriers, cols = devices (real then dummy); cost = largest - weight
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, largest));
  for (int r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < devices.size(); ++c) {
      cost[r][c] = largest - m(free_subcarriers[r], devices[c]);
    }
  }
  const auto row_of_col = min_cost_square(cost);
  double total = 0.0;
  if (chosen) chosen->assign(devices.size(), -1);
  for (std::size_t c = 0; c < devices.size(); ++c) {
    const int s = free_subcarriers[row_of_col[c]];
    total += m(s, devices[c]);
    if (chosen) (*chosen)[c] = s;
  }
  return total;
}

}  // namespace

std::vector<int> Assignment::device_of() const {
  std::vector<int> out(static_cast<std::size_t>(num_subcarriers), -1);
  for (std::size_t l = 0; l < subcarrier_of.size(); ++l) {
    const int s = subcarrier_of[l];
    if (s >= 0 && s < num_subcarriers) out[s] = static_cast<int>(l);
  }
  return out;
}

Matrix gain_matrix(const ChannelRealization& realization) { return realization.downlink_gain; }

double total_weight(const Matrix& matrix, const Assignment& assignment) {
  double total = 0.0;
  for (std::size_t l = 0; l < assignment.subcarrier_of.size(); ++l) {
    total += matrix(static_cast<std::size_t>(assignment.subcarrier_of[l]), l);
  }
  return total;
}

Assignment hungarian_max(const Matrix& matrix) {
  check_matrix(matrix);
  const int S = static_cast<int>(matrix.rows());
  const int L = static_cast<int>(matrix.cols());

  std::vector<int> devices(L);
  std::iota(devices.begin(), devices.end(), 0);
  std::vector<int> free_subcarriers(S);
  std::iota(free_subcarriers.begin(), free_subcarriers.end(), 0);
  const double optimum = best_total(matrix, devices, free_subcarriers);
  const double tol = tie_tolerance(matrix);

  // Fix devices in order to the lowest subcarrier that still admits an optimal completion.
  Assignment out;
  out.num_subcarriers = S;
  out.subcarrier_of.assign(L, -1);
  double fixed_weight = 0.0;
  for (int l = 0; l < L; ++l) {
    std::vector<int> rest(devices.begin() + l + 1, devices.end());
    bool placed = false;
    for (std::size_t k = 0; k < free_subcarriers.size() && !placed; ++k) {
      const int s = free_subcarriers[k];
      std::vector<int> remaining = free_subcarriers;
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(k));
      const double candidate = fixed_weight + matrix(s, l) + best_total(matrix, rest, remaining);
      if (candidate >= optimum - tol) {
        out.subcarrier_of[l] = s;
        fixed_weight += matrix(s, l);
        free_subcarriers = std::move(remaining);
        placed = true;
      }
    }
    if (!placed) {
      // Rounding pushed every completion below the optimum; fall back to the plain matching.
      std::vector<int> chosen;
      best_total(matrix, std::vector<int>(devices.begin() + l, devices.end()), free_subcarriers, &chosen);
      for (int j = l; j < L; ++j) out.subcarrier_of[j] = chosen[j - l];
      break;
    }
  }
  return out;
}

Assignment brute_force_max(const Matrix& matrix) {
  check_matrix(matrix);
  const int S = static_cast<int>(matrix.rows());
  const int L = static_cast<int>(matrix.cols());
  if (L > kBruteForceMaxDevices) {
    throw DomainError("brute_force_max: refused for L = " + std::to_string(L) + " > " +
                      std::to_string(kBruteForceMaxDevices));
  }
  std::vector<int> current(L, -1);
  std::vector<char> used(S, 0);
  double best = -std::numeric_limits<double>::infinity();

  // Pass one: the maximum. Pass two: the first assignment (lexicographic) within tolerance.
  auto enumerate = [&](auto&& self, int l, double acc, auto&& visit) -> bool {
    if (l == L) return visit(acc);
    for (int s = 0; s < S; ++s) {
      if (used[s]) continue;
      used[s] = 1;
      current[l] = s;
      const bool stop = self(self, l + 1, acc + matrix(s, l), visit);
      used[s] = 0;
      if (stop) return true;
    }
    return false;
  };
  enumerate(enumerate, 0, 0.0, [&](double total) {
    best = std::max(best, total);
    return false;
  });
  const double tol = tie_tolerance(matrix);
  Assignment out;
  out.num_subcarriers = S;
  enumerate(enumerate, 0, 0.0, [&](double total) {
    if (total >= best - tol) {
      out.subcarrier_of = current;
      return true;
    }
    return false;
  });
  return out;
}

std::optional<std::string> validate_assignment(const Assignment& a) {
  std::vector<int> seen(static_cast<std::size_t>(std::max(a.num_subcarriers, 0)), -1);
  for (std::size_t l = 0; l < a.subcarrier_of.size(); ++l) {
    const int s = a.subcarrier_of[l];
    if (s < 0 || s >= a.num_subcarriers) {
      std::ostringstream msg;
      msg << "range error: device " << l + 1 << " assigned subcarrier " << s + 1 << " outside [1, "
          << a.num_subcarriers << "]";
      return msg.str();
    }
    if (seen[s] >= 0) {
      std::ostringstream msg;
      msg << "duplicate error: subcarrier " << s + 1 << " assigned to devices " << seen[s] + 1 << " and "
          << l + 1;
      return msg.str();
    }
    seen[s] = static_cast<int>(l);
  }
  return std::nullopt;
}

}  // namespace facet
