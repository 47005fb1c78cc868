#include "rwcap/crossterm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rwcap {

namespace {

// Escape probabilities P(R'_x avoids C) for every x in X, via the exact
// solve over C.  Works for points inside or outside C.
Eigen::VectorXd escape_vector(const EquilibriumSolution& es_c, const PointSet& X,
                              GreenTable& table) {
  Eigen::VectorXd v(static_cast<long>(X.size()));
  for (size_t i = 0; i < X.size(); ++i) {
    // Points of the solved set carry their escape probability directly.
    long j = es_c.set().index_of(X[i]);
    v[static_cast<long>(i)] = j >= 0 ? es_c.es_vector()[j]
                                     : es_c.escape_probability(X[i], table);
  }
  return v;
}

// G_D block [G_D(a_i - b_j)] and the sum of its entries.
Eigen::MatrixXd green_block(const PointSet& A, const PointSet& B, GreenTable& table) {
  Eigen::MatrixXd g(static_cast<long>(A.size()), static_cast<long>(B.size()));
  for (size_t i = 0; i < A.size(); ++i) {
    for (size_t j = 0; j < B.size(); ++j) {
      g(static_cast<long>(i), static_cast<long>(j)) = table.green(A[i] - B[j]);
    }
  }
  return g;
}

struct ChiPrimeResult {
  double value = 0.0;
  double tolerance = 0.0;
};

// chi'(A,B) assembled from the path decomposition at the last A-visit:
// P(R'_{x2} avoids B, meets A) = sum_{x1 in A} [G_B(x2,x1) - delta] P(R'_{x1}
// avoids A u B).  The delta removes the zero-step term (the meeting must
// happen at a positive time), which also makes overlapping sets exact: a
// last visit can only land on A \ B.
ChiPrimeResult chi_prime_impl(const PointSet& A, const PointSet& B,
                              const EquilibriumSolution& es_a,
                              const EquilibriumSolution& es_u,
                              const Eigen::MatrixXd& gab, GreenTable& table) {
  const long na = static_cast<long>(A.size());
  const long nb = static_cast<long>(B.size());
  GreenMatrix gm = green_matrix(B, table);
  Eigen::LLT<Eigen::MatrixXd> llt(gm.entries);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("crossterm: Green matrix over B not positive definite");
  }
  // W(i,j) = G_B(b_i, a_j) - delta_{b_i, a_j}
  Eigen::MatrixXd rhs(nb, na);
  for (long j = 0; j < na; ++j) {
    for (long i = 0; i < nb; ++i) {
      rhs(i, j) = table.green(A[static_cast<size_t>(j)] - B[static_cast<size_t>(i)]);
    }
  }
  Eigen::MatrixXd w = llt.solve(rhs);
  for (long j = 0; j < na; ++j) {
    long i = B.index_of(A[static_cast<size_t>(j)]);
    if (i >= 0) w(i, j) -= 1.0;
  }

  Eigen::VectorXd esc_u_on_a = escape_vector(es_u, A, table);
  Eigen::VectorXd hit = w * esc_u_on_a;  // P(R'_{b_i} avoids B, meets A)
  Eigen::VectorXd esc_a_on_a = escape_vector(es_a, A, table);
  double value = esc_a_on_a.dot(gab * hit);

  // Error budget: the W solve amplifies per-entry Green error by ~2|B|, the
  // union escape probabilities carry es_u.tolerance(), and each of the
  // na*nb outer products contributes one Green-entry error (probs <= 1).
  double gtol = table.green_tol();
  double w_abs_row = w.cwiseAbs().rowwise().sum().maxCoeff();
  double hit_tol = w_abs_row * es_u.tolerance() +
                   static_cast<double>(na) * 2.0 * static_cast<double>(nb) * gtol;
  double gsum = gab.sum();
  double tol = gsum * (es_a.tolerance() + hit_tol) +
               static_cast<double>(na) * static_cast<double>(nb) * gtol;
  return {value, tol};
}

PointSet block_range(const WalkPath& path, size_t block_len, size_t i) {
  size_t lo = std::max<size_t>(1, (i - 1) * block_len);
  return range_of(path, lo, i * block_len);
}

}  // namespace

double chi(const PointSet& A, const PointSet& B, GreenTable& table) {
  if (A.empty() || B.empty()) return 0.0;
  PointSet U = PointSet::unioned(A, B);
  EquilibriumSolution es_a(A, table), es_b(B, table), es_u(U, table);
  Eigen::MatrixXd gab = green_block(A, B, table);
  Eigen::VectorXd ua = escape_vector(es_u, A, table);
  Eigen::VectorXd ub = escape_vector(es_u, B, table);
  Eigen::VectorXd aa = escape_vector(es_a, A, table);
  Eigen::VectorXd bb = escape_vector(es_b, B, table);
  return ua.dot(gab * bb) + aa.dot(gab * ub);
}

double tl(const PointSet& A, const PointSet& B, GreenTable& table) {
  if (A.empty() || B.empty()) return 0.0;
  EquilibriumSolution es_a(A, table), es_b(B, table);
  Eigen::MatrixXd gab = green_block(A, B, table);
  return escape_vector(es_a, A, table).dot(gab * escape_vector(es_b, B, table));
}

Bounded tl_split(const PointSet& A, const PointSet& B, GreenTable& table,
                 int box_margin) {
  if (A.empty() || B.empty()) return {0.0, 0.0};
  if (box_margin < 1) throw std::invalid_argument("tl_split: box_margin must be >= 1");
  EquilibriumSolution es_a(A, table), es_b(B, table);
  Eigen::VectorXd pa = escape_vector(es_a, A, table);
  Eigen::VectorXd pb = escape_vector(es_b, B, table);

  Point lo{}, hi{};
  for (int d = 0; d < 4; ++d) {
    int mn = A[0][d], mx = A[0][d];
    for (const Point& p : A) { mn = std::min(mn, p[d]); mx = std::max(mx, p[d]); }
    for (const Point& p : B) { mn = std::min(mn, p[d]); mx = std::max(mx, p[d]); }
    lo[d] = mn - box_margin;
    hi[d] = mx + box_margin;
  }

  // G_D = G~_D * G~_D, so TL = sum_a F_A(a) F_B(a) with
  // F_X(a) = sum_{x in X} G~_D(x - a) P(R'_x avoids X).
  double total = 0.0;
  double lookup_err = 0.0;  // first-order error of fa*fb from table lookups
  double gtol = table.green_tol();
  Point a;
  for (a[0] = lo[0]; a[0] <= hi[0]; ++a[0])
    for (a[1] = lo[1]; a[1] <= hi[1]; ++a[1])
      for (a[2] = lo[2]; a[2] <= hi[2]; ++a[2])
        for (a[3] = lo[3]; a[3] <= hi[3]; ++a[3]) {
          double fa = 0.0, fb = 0.0;
          for (size_t i = 0; i < A.size(); ++i)
            fa += table.green_sqrt(A[i] - a) * pa[static_cast<long>(i)];
          for (size_t j = 0; j < B.size(); ++j)
            fb += table.green_sqrt(B[j] - a) * pb[static_cast<long>(j)];
          total += fa * fb;
          lookup_err += (std::abs(fa) * static_cast<double>(B.size()) +
                         std::abs(fb) * static_cast<double>(A.size())) *
                        gtol;
        }

  // Far tail: outside the box each factor is <= 2 c3 Cap / d^3 in the far
  // field, and sum_{|a|>d} |a|^-6 ~ pi^2/d^2; a safety factor 2 absorbs the
  // lattice-sum slack.  Lookup errors accumulate first order in gtol; the
  // quadratic remainder is covered by the factor 2 on lookup_err.
  double d = static_cast<double>(box_margin);
  double tail = 2.0 * es_a.capacity() * es_b.capacity() / (2.0 * M_PI * M_PI) / (d * d);
  return {total,
          tail + 2.0 * lookup_err + es_a.tolerance() + es_b.tolerance()};
}

double chi_prime(const PointSet& A, const PointSet& B, GreenTable& table) {
  if (A.empty() || B.empty()) return 0.0;
  PointSet U = PointSet::unioned(A, B);
  EquilibriumSolution es_a(A, table), es_u(U, table);
  Eigen::MatrixXd gab = green_block(A, B, table);
  return chi_prime_impl(A, B, es_a, es_u, gab, table).value;
}

double splitting_residual(const PointSet& A, const PointSet& B, GreenTable& table) {
  if (A.empty() && B.empty()) return 0.0;
  if (A.empty() || B.empty()) return 0.0;  // Cap(U) cancels the surviving Cap
  PointSet U = PointSet::unioned(A, B);
  double cap_a = EquilibriumSolution(A, table).capacity();
  double cap_b = EquilibriumSolution(B, table).capacity();
  double cap_u = EquilibriumSolution(U, table).capacity();
  return cap_u - cap_a - cap_b + chi(A, B, table);
}

CrossTermReport cross_term_report(const PointSet& A, const PointSet& B,
                                  GreenTable& table) {
  CrossTermReport r;
  if (A.empty() || B.empty()) return r;
  PointSet U = PointSet::unioned(A, B);
  EquilibriumSolution es_a(A, table), es_b(B, table), es_u(U, table);
  Eigen::MatrixXd gab = green_block(A, B, table);
  Eigen::MatrixXd gba = gab.transpose();

  Eigen::VectorXd ua = escape_vector(es_u, A, table);
  Eigen::VectorXd ub = escape_vector(es_u, B, table);
  Eigen::VectorXd aa = escape_vector(es_a, A, table);
  Eigen::VectorXd bb = escape_vector(es_b, B, table);

  r.chi = ua.dot(gab * bb) + aa.dot(gab * ub);
  r.tl = aa.dot(gab * bb);
  ChiPrimeResult ab = chi_prime_impl(A, B, es_a, es_u, gab, table);
  ChiPrimeResult ba = chi_prime_impl(B, A, es_b, es_u, gba, table);
  r.chi_prime_ab = ab.value;
  r.chi_prime_ba = ba.value;
  r.residual = r.chi - (2.0 * r.tl - r.chi_prime_ab - r.chi_prime_ba);
  r.capacity_split_epsilon =
      es_u.capacity() - es_a.capacity() - es_b.capacity() + r.chi;

  double gsum = gab.sum();
  double npairs = static_cast<double>(A.size()) * static_cast<double>(B.size());
  double gtol = table.green_tol();
  double tol_chi = gsum * (2.0 * es_u.tolerance() + es_a.tolerance() +
                           es_b.tolerance()) +
                   2.0 * npairs * gtol;
  double tol_tl = gsum * (es_a.tolerance() + es_b.tolerance()) + npairs * gtol;
  r.tolerance = tol_chi + 2.0 * tol_tl + ab.tolerance + ba.tolerance;
  return r;
}

std::string CrossTermReport::to_json() const {
  nlohmann::json j{{"chi", chi},
                   {"tl", tl},
                   {"chi_prime_ab", chi_prime_ab},
                   {"chi_prime_ba", chi_prime_ba},
                   {"residual", residual},
                   {"capacity_split_epsilon", capacity_split_epsilon},
                   {"tolerance", tolerance}};
  return j.dump(2);
}

SlLambda sl_and_lambda(const WalkPath& path, int level, GreenTable& table) {
  size_t n = path.length();
  if (level < 0) throw std::invalid_argument("sl_and_lambda: level must be >= 0");
  size_t parts = size_t{1} << level;
  if (level > 0 && (parts > n || n % parts != 0)) {
    throw std::invalid_argument("sl_and_lambda: walk length not divisible by 2^level");
  }

  SlLambda out;
  PointSet S = range_of(path, 1, n);
  EquilibriumSolution es_s(S, table);
  Eigen::MatrixXd g = green_block(S, S, table);
  Eigen::VectorXd p = escape_vector(es_s, S, table);
  out.sl = p.dot(g * p);

  if (level > 0) {
    size_t m = n / parts;
    for (size_t j = 1; 2 * j <= parts; ++j) {
      PointSet left = block_range(path, m, 2 * j - 1);
      PointSet right = block_range(path, m, 2 * j);
      out.lambda += chi(left, right, table);
    }
  }
  return out;
}

double tl_prime(const WalkPath& walk1, const WalkPath& walk2, int blocks,
                GreenTable& table) {
  if (blocks < 1) throw std::invalid_argument("tl_prime: blocks must be >= 1");
  size_t b = static_cast<size_t>(blocks);
  if (walk1.length() != walk2.length()) {
    throw std::invalid_argument("tl_prime: walks must have equal length");
  }
  size_t n = walk1.length();
  if (n == 0 || n % b != 0) {
    throw std::invalid_argument("tl_prime: walk length not divisible by blocks");
  }
  size_t m = n / b;

  std::vector<PointSet> s1(b), s2(b);
  std::vector<Eigen::VectorXd> p1(b), p2(b);
  for (size_t i = 0; i < b; ++i) {
    s1[i] = block_range(walk1, m, i + 1);
    s2[i] = block_range(walk2, m, i + 1);
    EquilibriumSolution e1(s1[i], table), e2(s2[i], table);
    p1[i] = escape_vector(e1, s1[i], table);
    p2[i] = escape_vector(e2, s2[i], table);
  }

  double total = 0.0;
  for (size_t i = 0; i < b; ++i) {
    for (size_t j = 0; j < b; ++j) {
      Eigen::MatrixXd g = green_block(s1[i], s2[j], table);
      total += p1[i].dot(g * p2[j]);
    }
  }
  return total;
}

double tl_of_walks(const WalkPath& walk1, const WalkPath& walk2, GreenTable& table) {
  return tl(range_of(walk1, 1, walk1.length()), range_of(walk2, 1, walk2.length()),
            table);
}

}  // namespace rwcap
