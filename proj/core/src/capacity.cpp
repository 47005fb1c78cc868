#include "rwcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rwcap/rng.hpp"

namespace rwcap {

GreenMatrix green_matrix(const PointSet& A, GreenTable& table) {
  if (A.empty()) throw std::invalid_argument("green_matrix: empty set");
  const auto n = static_cast<Eigen::Index>(A.size());
  GreenMatrix m;
  m.points = A;
  m.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      double v = table.green(A[static_cast<size_t>(i)] - A[static_cast<size_t>(j)]);
      m.entries(i, j) = v;
      m.entries(j, i) = v;
    }
  m.tolerance = table.green_tol();
  return m;
}

double min_eigenvalue(const GreenMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      m.entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("min_eigenvalue: eigensolve failed");
  return es.eigenvalues().minCoeff();
}

EquilibriumSolution::EquilibriumSolution(const PointSet& A, GreenTable& table)
    : set_(A) {
  if (A.empty()) throw std::invalid_argument("equilibrium_capacity: empty set");
  GreenMatrix g = green_matrix(A, table);
  Eigen::LLT<Eigen::MatrixXd> llt(g.entries);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("equilibrium_capacity: factorization failed");
  // Minimum eigenvalue > 1/2 means every Cholesky pivot exceeds 1/2 as well;
  // a pivot below 1/4 signals a defective Green table, not a valid input.
  double min_pivot = llt.matrixLLT().diagonal().minCoeff();
  if (min_pivot * min_pivot < 0.25)
    throw std::runtime_error("equilibrium_capacity: pivot below 1/4 (Green table defect?)");
  es_ = llt.solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(A.size())));
  capacity_ = es_.sum();
  // Entry error e propagates through the solve as ||G^-1|| |A| e <= 2 |A| e
  // (minimum eigenvalue > 1/2).
  tol_ = 2.0 * static_cast<double>(A.size()) * g.tolerance + 1e-12;
  double lo = es_.minCoeff(), hi = es_.maxCoeff();
  if (lo < -tol_ || hi > 1.0 + tol_)
    throw std::runtime_error("equilibrium_capacity: escape probability outside [0,1]");
}

double EquilibriumSolution::es(const Point& x) const {
  long i = set_.index_of(x);
  if (i < 0) throw std::invalid_argument("es: point not in set");
  return es_(static_cast<Eigen::Index>(i));
}

double EquilibriumSolution::escape_probability(const Point& y, GreenTable& table) const {
  double acc = 0.0;
  for (size_t i = 0; i < set_.size(); ++i) {
    double g = table.green(y - set_[i]);
    if (set_[i] == y) g -= 1.0;
    acc += g * es_(static_cast<Eigen::Index>(i));
  }
  return 1.0 - acc;
}

double restricted_green(const PointSet& A, const Point& a, const Point& b,
                        GreenTable& table) {
  long ia = A.index_of(a);
  if (ia < 0) throw std::invalid_argument("restricted_green: a must lie in A");
  const auto n = static_cast<Eigen::Index>(A.size());
  GreenMatrix g = green_matrix(A, table);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i)
    rhs(i) = table.green(A[static_cast<size_t>(i)] - b);
  Eigen::LLT<Eigen::MatrixXd> llt(g.entries);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("restricted_green: factorization failed");
  return llt.solve(rhs)(static_cast<Eigen::Index>(ia));
}

namespace {

/// Least-squares fit y = c0 + c1 x + c2 x^{3/2} + c3 x^2 with x = 1/M;
/// returns c0 (the M -> infinity limit) and the rms residual.
std::pair<double, double> extrapolate_in_mass(const std::vector<double>& ms,
                                              const std::vector<double>& ys) {
  const int p = 5;
  size_t n = ms.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) {
    double x = 1.0 / ms[i];
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = x;
    X(static_cast<Eigen::Index>(i), 2) = std::pow(x, 1.5);
    X(static_cast<Eigen::Index>(i), 3) = x * x;
    X(static_cast<Eigen::Index>(i), 4) = std::pow(x, 2.5);
    Y(static_cast<Eigen::Index>(i)) = ys[i];
  }
  Eigen::VectorXd c = X.colPivHouseholderQr().solve(Y);
  double rss = (X * c - Y).squaredNorm();
  double dof = std::max<double>(1.0, static_cast<double>(n) - p);
  return {c(0), std::sqrt(rss / dof)};
}

}  // namespace

Bounded restricted_green_dp(const PointSet& A, const Point& a, const Point& b,
                            GreenTable& table, int max_steps) {
  if (A.empty()) return {table.green(b - a), table.green_tol()};
  // Work in coordinates relative to a.
  std::vector<Point> rel_a;
  int extent = 0;
  for (size_t i = 0; i < A.size(); ++i) {
    rel_a.push_back(A[i] - a);
    extent = std::max(extent, rel_a.back().norm_inf());
  }
  const int M = max_steps;
  const int R = static_cast<int>(std::ceil(std::sqrt(10.0 * M))) + extent + 1;
  const int side = 2 * R + 1;
  auto idx = [&](int x0, int x1, int x2, int x3) {
    return ((static_cast<size_t>(x0 + R) * side + (x1 + R)) * side + (x2 + R)) * side +
           (x3 + R);
  };
  std::vector<double> cur(static_cast<size_t>(side) * side * side * side, 0.0);
  std::vector<double> next(cur.size(), 0.0);
  cur[idx(0, 0, 0, 0)] = 1.0;

  std::vector<double> absorbed(A.size(), 0.0);  // H(x): mass first hitting x
  std::vector<double> gdb(A.size());            // G_D(b - x)
  for (size_t i = 0; i < A.size(); ++i) gdb[i] = table.green(b - A[i]);
  const double gba = table.green(b - a);
  double leaked = 0.0;

  std::vector<double> ms, ys;  // checkpoints for extrapolation
  std::vector<int> checkpoints;
  for (int k = 20; k >= 0; --k) {
    int m = static_cast<int>(std::lround((M - 1) * std::pow(2.0, -k / 8.0)));
    if (checkpoints.empty() || m > checkpoints.back()) checkpoints.push_back(m);
  }
  size_t next_cp = 0;
  double prev_est = gba;

  for (int m = 1; m <= M; ++m) {
    // Scan the whole reachable box (zero cells cost one read); mass outside
    // the |x|^2 <= 10m ball is dropped into the leak account.
    int r = std::min(m, R - 1);
    double step_leak = 0.0;
    for (int x0 = -r; x0 <= r; ++x0)
      for (int x1 = -r; x1 <= r; ++x1)
        for (int x2 = -r; x2 <= r; ++x2) {
          size_t base = idx(x0, x1, x2, -r);
          for (int x3 = -r; x3 <= r; ++x3, ++base) {
            double v = cur[base];
            if (v == 0.0) continue;
            if (x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3 > 10 * m + 4) {
              step_leak += v;  // outside the retained ball; drop and account
              cur[base] = 0.0;
              continue;
            }
            double p = v * 0.125;
            next[base + 1] += p;
            next[base - 1] += p;
            size_t s1 = static_cast<size_t>(side);
            next[base + s1] += p;
            next[base - s1] += p;
            next[base + s1 * s1] += p;
            next[base - s1 * s1] += p;
            next[base + s1 * s1 * s1] += p;
            next[base - s1 * s1 * s1] += p;
            cur[base] = 0.0;
          }
        }
    leaked += step_leak;
    cur.swap(next);
    // Absorb mass arriving on A.
    for (size_t i = 0; i < A.size(); ++i) {
      const Point& x = rel_a[i];
      size_t j = idx(x[0], x[1], x[2], x[3]);
      if (cur[j] != 0.0) {
        absorbed[i] += cur[j];
        cur[j] = 0.0;
      }
    }
    // The completed estimate oscillates with step parity (points of A on
    // different parities absorb on alternate steps); average two
    // consecutive steps at each checkpoint to cancel it.
    double est = gba;
    for (size_t i = 0; i < A.size(); ++i) est -= absorbed[i] * gdb[i];
    if (next_cp < checkpoints.size() && m == checkpoints[next_cp] + 1) {
      ms.push_back(static_cast<double>(m) - 0.5);
      ys.push_back(0.5 * (prev_est + est));
      ++next_cp;
    }
    prev_est = est;
  }

  // Fit the completed estimate over the last checkpoints only (the early
  // ones still carry higher-order transients), and use two window sizes as
  // a stability control.
  auto window = [&](size_t count) {
    size_t lo = ms.size() > count ? ms.size() - count : 0;
    std::vector<double> mw(ms.begin() + static_cast<long>(lo), ms.end());
    std::vector<double> yw(ys.begin() + static_cast<long>(lo), ys.end());
    return extrapolate_in_mass(mw, yw);
  };
  auto [limit, resid] = window(14);
  auto [limit2, resid2] = window(10);
  double tail = 2.0 * std::abs(limit - limit2) + resid + resid2;
  double max_gdb = *std::max_element(gdb.begin(), gdb.end());
  double tol = tail + leaked * std::max(max_gdb, 1.0) +
               (2.0 + static_cast<double>(A.size())) * table.green_tol();
  return {0.5 * (limit + limit2), tol};
}

Bounded restricted_green_dp_certified(const PointSet& A, const Point& a,
                                      const Point& b, GreenTable& table,
                                      int max_steps) {
  if (A.empty()) return {table.green(b - a), table.green_tol()};
  const long n = static_cast<long>(A.size());
  const double gtol = table.green_tol();

  // Series-grade Green values (tail-bounded partial sums, ~1e-10) for every
  // quantity that enters the weight solve; the cheaper table lookups are
  // reserved for the bulk completion where their error enters linearly.
  std::unordered_map<Point, Bounded, PointHash> series_cache;
  double gtol_s = 0.0;
  auto green_precise = [&](const Point& z) {
    Point key = canonical_orbit(z);
    auto it = series_cache.find(key);
    if (it == series_cache.end()) {
      it = series_cache.emplace(key, green_d_series(key, 20000)).first;
    }
    gtol_s = std::max(gtol_s, it->second.tol);
    return it->second.value;
  };

  // Last-exit weights w(x) = G_A(x, b): the Green system over A with
  // right-hand side G_D(. - b).  u(z) = sum_x G_D(z - x) w(x) then matches
  // the boundary values on A and is harmonic off A, so it is exactly the
  // expected future absorption weight from z.
  Eigen::MatrixXd gmat(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      gmat(i, j) = gmat(j, i) =
          green_precise(A[static_cast<size_t>(i)] - A[static_cast<size_t>(j)]);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gmat);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("restricted_green_dp_certified: bad Green matrix");
  }
  Eigen::VectorXd rhs(n);
  for (long i = 0; i < n; ++i) rhs[i] = green_precise(b - A[static_cast<size_t>(i)]);
  Eigen::VectorXd w = llt.solve(rhs);
  // Solve-error budget: min eigenvalue > 1/2 gives ||G^-1|| <= 2.
  double w_l2 = w.norm();
  double dw_l1 = std::sqrt(static_cast<double>(n)) * 2.0 *
                 (std::sqrt(static_cast<double>(n)) * gtol_s +
                  static_cast<double>(n) * gtol_s * w_l2);
  double w_l1 = w.cwiseAbs().sum();

  std::vector<Point> rel_a;
  int extent = 0;
  for (size_t i = 0; i < A.size(); ++i) {
    rel_a.push_back(A[i] - a);
    extent = std::max(extent, rel_a.back().norm_inf());
  }
  const int M = std::max(max_steps, 8);
  const int R = static_cast<int>(std::ceil(std::sqrt(10.0 * M))) + extent + 1;
  const int side = 2 * R + 1;
  auto idx = [&](int x0, int x1, int x2, int x3) {
    return ((static_cast<size_t>(x0 + R) * side + (x1 + R)) * side + (x2 + R)) * side +
           (x3 + R);
  };
  std::vector<double> cur(static_cast<size_t>(side) * side * side * side, 0.0);
  std::vector<double> next(cur.size(), 0.0);
  cur[idx(0, 0, 0, 0)] = 1.0;

  std::vector<double> absorbed(A.size(), 0.0);
  std::vector<double> gdb(A.size());
  for (size_t i = 0; i < A.size(); ++i) gdb[i] = green_precise(b - A[i]);
  const double gba = green_precise(b - a);

  double leak_weighted = 0.0;
  std::vector<double> estimates;
  double alive_at_value = 0.0;

  for (int m = 1; m <= M; ++m) {
    int r = std::min(m, R - 1);
    double step_leak = 0.0;
    for (int x0 = -r; x0 <= r; ++x0)
      for (int x1 = -r; x1 <= r; ++x1)
        for (int x2 = -r; x2 <= r; ++x2) {
          size_t base = idx(x0, x1, x2, -r);
          for (int x3 = -r; x3 <= r; ++x3, ++base) {
            double v = cur[base];
            if (v == 0.0) continue;
            if (x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3 > 10 * m + 4) {
              step_leak += v;
              cur[base] = 0.0;
              continue;
            }
            double p = v * 0.125;
            next[base + 1] += p;
            next[base - 1] += p;
            size_t s1 = static_cast<size_t>(side);
            next[base + s1] += p;
            next[base - s1] += p;
            next[base + s1 * s1] += p;
            next[base - s1 * s1] += p;
            next[base + s1 * s1 * s1] += p;
            next[base - s1 * s1 * s1] += p;
            cur[base] = 0.0;
          }
        }
    // Leaked mass sits at |z|^2 > 10m; its future weight is at most
    // ||w||_1 times the far-field Green value at that distance (factor 2
    // of safety on the asymptote).
    double leak_dist = std::max(1.0, std::sqrt(10.0 * m + 4.0) -
                                         static_cast<double>(extent) - 1.0);
    leak_weighted +=
        step_leak * 2.0 * w_l1 * green_d_far_field(leak_dist * leak_dist);
    cur.swap(next);
    for (size_t i = 0; i < A.size(); ++i) {
      const Point& x = rel_a[i];
      size_t j = idx(x[0], x[1], x[2], x[3]);
      if (cur[j] != 0.0) {
        absorbed[i] += cur[j];
        cur[j] = 0.0;
      }
    }
    if (m % (M / 4) == 0) {
      // Exact completion: est = gba - sum H gdb - sum_z alive(z) u(z).
      double completion = 0.0;
      double alive_total = 0.0;
      for (int x0 = -r - 1; x0 <= r + 1; ++x0)
        for (int x1 = -r - 1; x1 <= r + 1; ++x1)
          for (int x2 = -r - 1; x2 <= r + 1; ++x2) {
            size_t base = idx(x0, x1, x2, -r - 1);
            for (int x3 = -r - 1; x3 <= r + 1; ++x3, ++base) {
              double v = cur[base];
              if (v == 0.0) continue;
              alive_total += v;
              Point z{x0, x1, x2, x3};
              double u = 0.0;
              for (long i = 0; i < n; ++i) {
                u += table.green(z - rel_a[static_cast<size_t>(i)]) * w[i];
              }
              completion += v * u;
            }
          }
      double est = gba - completion;
      for (size_t i = 0; i < A.size(); ++i) est -= absorbed[i] * gdb[i];
      estimates.push_back(est);
      if (m == M) alive_at_value = alive_total;
    }
  }

  double lo = *std::min_element(estimates.begin(), estimates.end());
  double hi = *std::max_element(estimates.begin(), estimates.end());
  double drift = hi - lo;
  // A weight error dw changes the completion by at most
  // ||dw||_1 max_x sum_z alive(z) G_D(z-x) <= ||dw||_1 G_D(0) alive_total;
  // per-lookup errors in u add gtol ||w||_1 (alive mass is at most 1).
  double weight_err = dw_l1 * 1.25 * alive_at_value + gtol * w_l1;
  double tol = 3.0 * drift + leak_weighted + weight_err +
               gtol_s * 2.0;  // gba and the absorbed-mass completion values
  return {estimates.back(), tol};
}

McEscapeContext::McEscapeContext(const PointSet& A, double escape_radius,
                                 uint64_t max_len)
    : member_(A.points()), size_(A.size()) {
  if (A.empty()) return;
  center_ = A.centroid_rounded();
  double spread = 0.0;  // max distance of A from its rounded centroid
  for (size_t i = 0; i < A.size(); ++i) {
    spread = std::max(spread, (A[i] - center_).norm2());
    // Membership checks only matter inside A's bounding ball.
    near_sq_ = std::max(near_sq_, (A[i] - center_).norm2_sq());
  }
  escape_radius_ =
      escape_radius > 0.0 ? escape_radius : std::max(10.0 * A.diameter(), 10.0);
  max_len_ = max_len != 0 ? max_len
                          : static_cast<uint64_t>(50.0 * escape_radius_ *
                                                  escape_radius_);
  decision_sq_ = static_cast<long>(
      std::ceil((escape_radius_ + spread) * (escape_radius_ + spread)));
}

McEscapeResult McEscapeContext::run(const Point& y, uint64_t trials,
                                    uint64_t seed, uint64_t stream_base) const {
  McEscapeResult out;
  out.trials = trials;
  if (size_ == 0) {
    out.estimate = 1.0;
    return out;
  }
  uint64_t captured = 0, undecided = 0;
  for (uint64_t t = 0; t < trials; ++t) {
    CounterRng rng(seed, stream_base + t);
    Point d = y - center_;  // position relative to the centroid
    long dsq = d.norm2_sq();
    bool decided = false;
    for (uint64_t step = 0; step < max_len_; ++step) {
      int code = rng.next_step_code();
      int axis = code >> 1;
      int sign = (code & 1) ? -1 : 1;
      dsq += 2 * static_cast<long>(sign) * d[axis] + 1;
      d[axis] += sign;
      if (dsq <= near_sq_ && member_.contains(d + center_)) {
        ++captured;
        decided = true;
        break;
      }
      if (dsq >= decision_sq_) {
        decided = true;  // escaped
        break;
      }
    }
    if (!decided) ++undecided;
  }
  out.captured = captured;
  out.undecided = undecided;
  double p = 1.0 - static_cast<double>(captured) / static_cast<double>(trials);
  out.estimate = p;
  out.std_error = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(trials)) /
                            static_cast<double>(trials));
  // A walk at distance >= R from A still hits with probability at most
  // sum_c G_D(z-c) <= |A| * far-field(R) * safety; undecided walks were
  // counted escaped and add their full fraction.
  out.bias_bound = 1.25 * static_cast<double>(size_) *
                       green_d_far_field(escape_radius_ * escape_radius_) +
                   static_cast<double>(undecided) / static_cast<double>(trials);
  return out;
}

McEscapeResult mc_escape(const PointSet& A, const Point& y, uint64_t trials,
                         double escape_radius, uint64_t max_len, uint64_t seed,
                         uint64_t stream_base) {
  McEscapeContext ctx(A, escape_radius, max_len);
  return ctx.run(y, trials, seed, stream_base);
}

}  // namespace rwcap
