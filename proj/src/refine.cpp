#include "refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace facet::detail {
namespace {

constexpr double kNewtonTol = 1e-13;
constexpr int kNewtonMaxIter = 60;
constexpr double kSignTol = 1e-10;

struct Sets {
  std::vector<char> active;  // device in A
  std::vector<char> powered; // assigned subcarrier with p > 0
  std::vector<char> free_rho;
};

class System {
 public:
  System(const Model& m, Sets& sets, std::vector<double>& p, std::vector<double>& rho, double scale)
      : m_(m), sets_(sets), p_(p), rho_(rho), scale_(scale), ptot_(m.total_power()) {
    for (int s = 0; s < m.S(); ++s)
      if (sets.powered[s]) ps_.push_back(s);
    for (int l = 0; l < m.L(); ++l) {
      if (!sets.active[l]) continue;
      as_.push_back(l);
      if (sets.free_rho[l]) fs_.push_back(l);
    }
  }

  int size() const { return static_cast<int>(ps_.size() + fs_.size() + as_.size() + 2); }

  Eigen::VectorXd pack(const std::vector<double>& lambda, double eta, double r) const {
    Eigen::VectorXd z(size());
    int i = 0;
    for (int s : ps_) z[i++] = p_[s] / ptot_;
    for (int l : fs_) z[i++] = rho_[l];
    for (int l : as_) z[i++] = lambda[l];
    z[i++] = eta * ptot_ / scale_;
    z[i++] = r / scale_;
    return z;
  }

  void unpack(const Eigen::VectorXd& z, std::vector<double>& lambda, double& eta, double& r) const {
    int i = 0;
    for (int s : ps_) p_[s] = z[i++] * ptot_;
    for (int l : fs_) rho_[l] = z[i++];
    std::fill(lambda.begin(), lambda.end(), 0.0);
    for (int l : as_) lambda[l] = z[i++];
    eta = z[i++] * scale_ / ptot_;
    r = z[i++] * scale_;
  }

  // Largest step in (0, 1] keeping powers positive and free ratios inside (0, 1).
  double max_step(const Eigen::VectorXd& z, const Eigen::VectorXd& d) const {
    double a = 1.0;
    const int np = static_cast<int>(ps_.size());
    for (int i = 0; i < np; ++i)
      if (d[i] < 0.0) a = std::min(a, 0.995 * z[i] / -d[i]);
    for (int j = 0; j < static_cast<int>(fs_.size()); ++j) {
      const int i = np + j;
      if (d[i] < 0.0) a = std::min(a, 0.995 * z[i] / -d[i]);
      if (d[i] > 0.0) a = std::min(a, 0.995 * (1.0 - z[i]) / d[i]);
    }
    return a;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& z) const {
    std::vector<double> p = p_;
    std::vector<double> rho = rho_;
    int i = 0;
    for (int s : ps_) p[s] = z[i++] * ptot_;
    for (int l : fs_) rho[l] = z[i++];
    std::vector<double> lambda(m_.L(), 0.0);
    for (int l : as_) lambda[l] = z[i++];
    const double eta = z[i++] * scale_ / ptot_;
    const double r = z[i++] * scale_;

    Eigen::VectorXd out(size());
    int k = 0;
    std::vector<double> up(m_.L()), sl(m_.L()), rf(m_.L());
    for (int l : as_) {
      const double x = m_.snr_db(l, p[m_.own(l)], rho[l]);
      up[l] = m_.uplink_of(l, x);
      sl[l] = m_.slope_of(x);
      rf[l] = m_.rf(l, p);
      out[k++] = (up[l] - rho[l] * m_.kappa() * rf[l] - r) / scale_;
    }
    double sum_p = 0.0;
    for (double v : p) sum_p += v;
    out[k++] = (sum_p - ptot_) / ptot_;
    double sum_l = 0.0;
    for (int l : as_) sum_l += lambda[l];
    out[k++] = sum_l - 1.0;
    for (int s : ps_) {
      double g = eta;
      for (int l : as_) {
        g -= lambda[l] * rho[l] * m_.kappa() * m_.gain(s, l);
        if (m_.own(l) == s) g -= lambda[l] * up[l] * sl[l] / p[s];
      }
      out[k++] = g * ptot_ / scale_;
    }
    for (int l : fs_) out[k++] = (up[l] * sl[l] / (1.0 - rho[l]) - m_.kappa() * rf[l]) / scale_;
    return out;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const {
    const int n = size();
    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd zp = z, zm = z;
    for (int j = 0; j < n; ++j) {
      double h = 1e-7 * std::max(std::abs(z[j]), 1e-3);
      if (j < static_cast<int>(ps_.size() + fs_.size())) {
        // stay inside the open domain of powers and ratios
        h = std::min(h, 0.5 * z[j]);
        if (j >= static_cast<int>(ps_.size())) h = std::min(h, 0.5 * (1.0 - z[j]));
      }
      zp[j] = z[j] + h;
      zm[j] = z[j] - h;
      J.col(j) = (residual(zp) - residual(zm)) / (2.0 * h);
      zp[j] = zm[j] = z[j];
    }
    return J;
  }

  // Initial multipliers: least-squares fit of the power stationarity rows and sum(lambda) = 1.
  void fit_multipliers(std::vector<double>& lambda, double& eta) const {
    const int na = static_cast<int>(as_.size());
    const int rows = static_cast<int>(ps_.size()) + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, na + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
    std::vector<double> up(m_.L()), sl(m_.L());
    for (int l : as_) {
      const double x = m_.snr_db(l, p_[m_.own(l)], rho_[l]);
      up[l] = m_.uplink_of(l, x);
      sl[l] = m_.slope_of(x);
    }
    for (int i = 0; i < static_cast<int>(ps_.size()); ++i) {
      const int s = ps_[i];
      for (int j = 0; j < na; ++j) {
        const int l = as_[j];
        double d = -rho_[l] * m_.kappa() * m_.gain(s, l);
        if (m_.own(l) == s) d -= up[l] * sl[l] / p_[s];
        A(i, j) = d * ptot_ / scale_;
      }
      A(i, na) = 1.0;  // eta in units of scale / P
    }
    for (int j = 0; j < na; ++j) A(rows - 1, j) = 1.0;
    b[rows - 1] = 1.0;
    const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(b);
    std::fill(lambda.begin(), lambda.end(), 0.0);
    for (int j = 0; j < na; ++j) lambda[as_[j]] = sol[j];
    eta = sol[na] * scale_ / ptot_;
  }

  const std::vector<int>& powered() const { return ps_; }
  const std::vector<int>& free_list() const { return fs_; }

 private:
  const Model& m_;
  Sets& sets_;
  std::vector<double>& p_;
  std::vector<double>& rho_;
  double scale_;
  double ptot_;
  std::vector<int> ps_, fs_, as_;
};

// d net_l / d rho_l at the current point (one-sided limits at the bounds).
double rho_gradient(const Model& m, int l, const std::vector<double>& p, double rho) {
  const double h = m.rf(l, p);
  if (rho >= 1.0) {
    // P |t'| / (1 - rho) -> U0 10^{x0/10} G(x) -> 0 as x -> -inf when h has a rising branch.
    return std::isinf(m.law().peak()) ? std::numeric_limits<double>::infinity() : -m.kappa() * h;
  }
  const double x = m.snr_db(l, p[m.own(l)], rho);
  return m.uplink_of(l, x) * m.slope_of(x) / (1.0 - rho) - m.kappa() * h;
}

}  // namespace

RefineResult refine_from(const Model& m, std::vector<double> p, std::vector<double> rho,
                         const std::vector<double>& lambda_hint, double active_tol) {
  RefineResult res;
  const int L = m.L();
  const int S = m.S();
  const double ptot = m.total_power();
  if (!(ptot > 0.0)) {
    res.reason = "zero budget";
    return res;
  }

  PointEval ev;
  m.evaluate(p, rho, ev);
  double scale = std::abs(ev.r);
  for (double u : ev.uplink) scale = std::max(scale, u);
  if (!(scale > 0.0)) scale = 1.0;

  Sets sets;
  sets.active.assign(L, 0);
  sets.powered.assign(S, 0);
  sets.free_rho.assign(L, 0);
  for (int l = 0; l < L; ++l)
    sets.active[l] = (ev.r - ev.net[l] <= active_tol * scale) || lambda_hint[l] > 1e-3;
  for (int s = 0; s < S; ++s) {
    // A powered subcarrier whose owner is off the worst case only pays off as a harvest source.
    const int owner = m.device_on(s);
    sets.powered[s] = owner >= 0 && p[s] > 1e-9 * ptot && (sets.active[owner] || p[s] > 1e-3 * ptot);
    if (owner >= 0 && !sets.powered[s]) p[s] = 0.0;
  }
  for (int l = 0; l < L; ++l) {
    sets.free_rho[l] = !m.rho_fixed() && rho[l] > 1e-9 && rho[l] < 1.0 - 1e-9;
  }

  std::vector<double> lambda(L, 0.0);
  double eta = 0.0;
  double r = ev.r;
  const int max_changes = 4 * (L + S) + 10;

  for (int round = 0; round <= max_changes; ++round) {
    for (int s = 0; s < S; ++s)
      if (!sets.powered[s]) p[s] = 0.0;
    bool any_power = false;
    for (int s = 0; s < S; ++s) any_power = any_power || sets.powered[s];
    if (!any_power) {
      res.reason = "empty support";
      return res;
    }
    System sys(m, sets, p, rho, scale);
    sys.fit_multipliers(lambda, eta);
    {
      double rr = -std::numeric_limits<double>::infinity();
      for (int l = 0; l < L; ++l)
        if (sets.active[l]) rr = std::max(rr, m.net_of(l, p[m.own(l)], rho[l], m.rf(l, p)));
      r = rr;
    }
    Eigen::VectorXd z = sys.pack(lambda, eta, r);
    Eigen::VectorXd R = sys.residual(z);
    bool converged = false;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      if (!R.allFinite()) break;
      if (R.lpNorm<Eigen::Infinity>() < kNewtonTol) {
        converged = true;
        break;
      }
      ++res.newton_iters;
      const Eigen::MatrixXd J = sys.jacobian(z);
      const Eigen::VectorXd d = J.completeOrthogonalDecomposition().solve(-R);
      if (!d.allFinite()) break;
      double a = sys.max_step(z, d);
      const double base = R.squaredNorm();
      bool accepted = false;
      while (a > 1e-12) {
        const Eigen::VectorXd zn = z + a * d;
        const Eigen::VectorXd Rn = sys.residual(zn);
        if (Rn.allFinite() && Rn.squaredNorm() < (1.0 - 1e-4 * a) * base) {
          z = zn;
          R = Rn;
          accepted = true;
          break;
        }
        a *= 0.5;
      }
      if (!accepted) {
        // Near the floor of double precision the merit test can fail on rounding alone.
        converged = R.lpNorm<Eigen::Infinity>() < 1e-10;
        break;
      }
    }
    sys.unpack(z, lambda, eta, r);

    if (!converged) {
      // Repairs in order of how clearly the iterate points at them: a variable sitting on
      // its bound, a constraint outside A that has become binding, a clearly negative
      // multiplier, finally the variable nearest its bound.
      int kind = -1, idx = -1;
      double closest = std::numeric_limits<double>::infinity();
      for (int s : sys.powered()) {
        if (p[s] / ptot < closest) closest = p[s] / ptot, kind = 0, idx = s;
      }
      for (int l : sys.free_list()) {
        const double dist = std::min(rho[l], 1.0 - rho[l]);
        if (dist < closest) closest = dist, kind = 1, idx = l;
      }
      auto pin = [&] {
        if (kind == 0) {
          sets.powered[idx] = 0;
        } else {
          rho[idx] = rho[idx] < 0.5 ? 0.0 : 1.0;
          sets.free_rho[idx] = 0;
        }
        ++res.set_changes;
      };
      if (kind >= 0 && closest < 1e-6) {
        pin();
        continue;
      }
      int over = -1;
      double over_val = kSignTol * scale;
      for (int l = 0; l < L; ++l) {
        if (sets.active[l]) continue;
        const double excess = m.net_of(l, p[m.own(l)], rho[l], m.rf(l, p)) - r;
        if (excess > over_val) over = l, over_val = excess;
      }
      if (over >= 0) {
        sets.active[over] = 1;
        sets.free_rho[over] = !m.rho_fixed() && rho[over] > 0.0 && rho[over] < 1.0;
        ++res.set_changes;
        continue;
      }
      int neg = -1;
      double neg_val = -1e-6;
      for (int l = 0; l < L; ++l)
        if (sets.active[l] && lambda[l] < neg_val) neg = l, neg_val = lambda[l];
      if (neg >= 0) {
        sets.active[neg] = 0;
        sets.free_rho[neg] = 0;
        ++res.set_changes;
        continue;
      }
      if (kind < 0 || closest > 1e-3) {
        res.reason = "newton failed";
        return res;
      }
      pin();
      continue;
    }

    // Sign checks, one correction per round.
    int worst = -1;
    double worst_val = -kSignTol;
    for (int l = 0; l < L; ++l)
      if (sets.active[l] && lambda[l] < worst_val) worst = l, worst_val = lambda[l];
    if (worst >= 0) {
      sets.active[worst] = 0;
      sets.free_rho[worst] = 0;
      ++res.set_changes;
      continue;
    }

    // Devices outside A must not exceed r once their ratio is at its own best response.
    worst = -1;
    worst_val = kSignTol * scale;
    for (int l = 0; l < L; ++l) {
      if (sets.active[l]) continue;
      const double h = m.rf(l, p);
      rho[l] = m.best_rho(l, p[m.own(l)], h);
      const double excess = m.net_of(l, p[m.own(l)], rho[l], h) - r;
      if (excess > worst_val) worst = l, worst_val = excess;
    }
    if (worst >= 0) {
      sets.active[worst] = 1;
      const int s = m.own(worst);
      if (!sets.powered[s] && !m.t_fixed()) {
        // Harvesting alone leaves it above r: give it feedback power and decode everything;
        // the ratio checks below move rho off 0 when that pays.
        sets.powered[s] = 1;
        p[s] = 1e-6 * ptot;
        if (!m.rho_fixed()) rho[worst] = 0.0;
      }
      sets.free_rho[worst] = !m.rho_fixed() && rho[worst] > 0.0 && rho[worst] < 1.0;
      ++res.set_changes;
      continue;
    }

    // Unpowered subcarriers: reduced cost must be nonnegative.
    worst = -1;
    worst_val = -kSignTol;
    for (int s = 0; s < S; ++s) {
      if (m.device_on(s) < 0 || sets.powered[s]) continue;
      double g = eta;
      for (int l = 0; l < L; ++l) {
        if (!sets.active[l]) continue;
        g -= lambda[l] * rho[l] * m.kappa() * m.gain(s, l);
        if (m.own(l) == s && rho[l] < 1.0 && std::isinf(m.law().peak()) && !m.t_fixed()) {
          g = -std::numeric_limits<double>::infinity();
        }
      }
      const double rc = g * ptot / scale;
      if (rc < worst_val) worst = s, worst_val = rc;
    }
    if (worst >= 0) {
      sets.powered[worst] = 1;
      p[worst] = 1e-6 * ptot;
      ++res.set_changes;
      continue;
    }

    // Pinned ratios of active devices: projected gradient must point outward.
    worst = -1;
    worst_val = kSignTol;
    if (!m.rho_fixed()) {
      for (int l = 0; l < L; ++l) {
        if (!sets.active[l] || sets.free_rho[l]) continue;
        const double g = rho_gradient(m, l, p, rho[l]) / scale;
        const double v = rho[l] <= 0.0 ? -g : g;
        if (v > worst_val) worst = l, worst_val = v;
      }
    }
    if (worst >= 0) {
      // Jump to the exact 1-D response when it moves; the stationary equation can have no
      // root on the way (net falling all the way to the other bound).
      const double h = m.rf(worst, p);
      const double b = m.best_rho(worst, p[m.own(worst)], h);
      if (b != rho[worst]) {
        rho[worst] = b;
        sets.free_rho[worst] = b > 0.0 && b < 1.0;
      } else {
        rho[worst] = rho[worst] <= 0.0 ? 1e-6 : 1.0 - 1e-6;
        sets.free_rho[worst] = 1;
      }
      ++res.set_changes;
      continue;
    }

    // A stationary interior ratio can sit on the rising branch; compare with the exact 1-D response.
    worst = -1;
    worst_val = kSignTol * scale;
    if (!m.rho_fixed()) {
      for (int l = 0; l < L; ++l) {
        if (!sets.active[l]) continue;
        const double h = m.rf(l, p);
        const double b = m.best_rho(l, p[m.own(l)], h);
        const double gain = m.net_of(l, p[m.own(l)], rho[l], h) - m.net_of(l, p[m.own(l)], b, h);
        if (gain > worst_val) worst = l, worst_val = gain;
      }
    }
    if (worst >= 0) {
      const double h = m.rf(worst, p);
      rho[worst] = m.best_rho(worst, p[m.own(worst)], h);
      sets.free_rho[worst] = rho[worst] > 0.0 && rho[worst] < 1.0;
      ++res.set_changes;
      continue;
    }

    double sum_p = 0.0;
    for (double v : p) sum_p += v;
    for (double& v : p) v *= ptot / sum_p;
    res.certified = true;
    res.p = std::move(p);
    res.rho = std::move(rho);
    res.lambda = std::move(lambda);
    res.eta = eta;
    m.evaluate(res.p, res.rho, ev);
    res.r = ev.r;
    return res;
  }
  res.reason = "too many active-set changes";
  return res;
}

// With t and rho frozen the problem is the matrix game  min_q max_l sum_s q_s G(l, s),
// G(l, s) = c_l - P a_ls, q on the simplex. After shifting G positive, the column player's
// LP  max sum u  s.t.  G' u <= 1, u >= 0  starts feasible at u = 0, so a plain tableau
// simplex with Bland's rule solves it; the objective row holds the row player's strategy.
RefineResult refine_linear(const Model& m) {
  RefineResult res;
  const int L = m.L();
  const int S = m.S();
  const double P = m.total_power();
  std::vector<int> cols;
  for (int s = 0; s < S; ++s)
    if (m.device_on(s) >= 0) cols.push_back(s);
  const int K = static_cast<int>(cols.size());
  const double rho = m.fixed_rho();

  Eigen::MatrixXd G(L, K);
  for (int l = 0; l < L; ++l) {
    const double c = m.uplink_of(l, 0.0);
    for (int j = 0; j < K; ++j) G(l, j) = c - P * rho * m.kappa() * m.gain(cols[j], l);
  }
  const double lo = G.minCoeff();
  const double span = std::max(G.maxCoeff() - lo, std::abs(lo)) + 1e-300;
  // Positive and of order one.
  const Eigen::MatrixXd Gp = (G.array() - lo).matrix() / span + Eigen::MatrixXd::Ones(L, K);

  // Tableau rows 0..L-1 constraints, row L objective; columns u (K), slacks (L), rhs.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(L + 1, K + L + 1);
  T.block(0, 0, L, K) = Gp;
  T.block(0, K, L, L) = Eigen::MatrixXd::Identity(L, L);
  T.block(0, K + L, L, 1).setOnes();
  T.block(L, 0, 1, K).setConstant(-1.0);
  std::vector<int> basis(L);
  for (int i = 0; i < L; ++i) basis[i] = K + i;

  constexpr double kPivotTol = 1e-12;
  const int max_pivots = 50 * (K + L);
  int pivots = 0;
  while (true) {
    int enter = -1;
    for (int j = 0; j < K + L && enter < 0; ++j)
      if (T(L, j) < -kPivotTol) enter = j;
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < L; ++i) {
      if (T(i, enter) <= kPivotTol) continue;
      const double ratio = T(i, K + L) / T(i, enter);
      if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0 || ++pivots > max_pivots) {
      res.reason = "simplex failed";
      return res;
    }
    T.row(leave) /= T(leave, enter);
    for (int i = 0; i <= L; ++i)
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    basis[leave] = enter;
  }

  const double total_u = T(L, K + L);
  if (!(total_u > 0.0)) {
    res.reason = "simplex failed";
    return res;
  }
  res.p.assign(S, 0.0);
  for (int i = 0; i < L; ++i)
    if (basis[i] < K) res.p[cols[basis[i]]] = std::max(0.0, T(i, K + L)) / total_u * P;
  res.lambda.assign(L, 0.0);
  double sum_l = 0.0;
  for (int l = 0; l < L; ++l) sum_l += (res.lambda[l] = std::max(0.0, T(L, K + l)));
  for (double& v : res.lambda) v /= sum_l;
  res.rho.assign(L, rho);
  res.eta = 0.0;
  for (int j = 0; j < K; ++j) {
    double g = 0.0;
    for (int l = 0; l < L; ++l) g += res.lambda[l] * rho * m.kappa() * m.gain(cols[j], l);
    res.eta = std::max(res.eta, g);
  }
  PointEval ev;
  m.evaluate(res.p, res.rho, ev);
  res.r = ev.r;
  res.newton_iters = pivots;
  res.certified = true;
  return res;
}

RefineResult refine(const Model& m, std::vector<double> p, std::vector<double> rho,
                    const std::vector<double>& lambda_hint, double r_bound) {
  if (m.t_fixed() && m.rho_fixed()) {
    RefineResult lin = refine_linear(m);
    if (lin.certified && lin.r > r_bound) {
      lin.certified = false;
      lin.reason = "refined point not better than the start";
    }
    return lin;
  }
   RefineResult first;
  for (double tol : {1e-3, 1e-2, 1e-1, 10.0}) {
    RefineResult r = refine_from(m, p, rho, lambda_hint, tol);
    if (r.certified && r.r <= r_bound) return r;
    if (first.reason.empty()) {
      first = std::move(r);
      if (first.certified) {
        first.certified = false;
        first.reason = "refined point not better than the start";
      }
    }
  }
  return first;
}

}  // namespace facet::detail
