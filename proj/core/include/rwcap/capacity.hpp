#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "rwcap/green.hpp"
#include "rwcap/lattice.hpp"

namespace rwcap {

/// Dense symmetric matrix [G_D(a-b)] over a point set.  Positive definite
/// with minimum eigenvalue > 1/2 for any finite set.
struct GreenMatrix {
  PointSet points;
  Eigen::MatrixXd entries;
  double tolerance = 0.0;  // per-entry bound inherited from the table
};

GreenMatrix green_matrix(const PointSet& A, GreenTable& table);

/// Smallest eigenvalue by a dense symmetric eigensolve.
double min_eigenvalue(const GreenMatrix& m);

/// Equilibrium measure and capacity of a finite set: es solves G es = 1,
/// es(x) = P^x(never return to A), capacity = sum es.
class EquilibriumSolution {
 public:
  EquilibriumSolution(const PointSet& A, GreenTable& table);

  const PointSet& set() const { return set_; }
  double capacity() const { return capacity_; }
  const Eigen::VectorXd& es_vector() const { return es_; }
  double es(const Point& x) const;  // x must be in the set

  /// P(walk from y avoids A at all times >= 1); equals es(y) for y in A.
  double escape_probability(const Point& y, GreenTable& table) const;

  /// Accumulated solve tolerance (entry tolerance amplified by the solve).
  double tolerance() const { return tol_; }

 private:
  PointSet set_;
  Eigen::VectorXd es_;
  double capacity_ = 0.0;
  double tol_ = 0.0;
};

inline EquilibriumSolution equilibrium_capacity(const PointSet& A, GreenTable& table) {
  return EquilibriumSolution(A, table);
}

/// Restricted Green's function G_A(a,b) = sum_m P^a(S_m = b, S_i not in A
/// for 1 <= i <= m), via the linear system over A (requires a in A).
double restricted_green(const PointSet& A, const Point& a, const Point& b,
                        GreenTable& table);

/// Oracle route: absorption dynamic programming over a truncated box up to
/// max_steps, with the remainder completed through the identity
/// G_A(a,b) = G_D(b-a) - sum_x H(x) G_D(b-x) (H = absorbed mass on A) and
/// extrapolated in powers of 1/sqrt(M).  `tol` reports the extrapolation
/// residual plus truncation-leak and table tolerances.  Accepts any a.
Bounded restricted_green_dp(const PointSet& A, const Point& a, const Point& b,
                            GreenTable& table, int max_steps = 192);

/// Certified variant of the absorption oracle: the tail beyond each
/// checkpoint is completed exactly through u(z) = sum_x G_D(z-x) w(x) with
/// w solving the Green system over A for the right-hand side G_D(. - b)
/// (u is the harmonic extension of the absorption weights, so the completed
/// estimate is step-independent).  Any inconsistency in w appears as drift
/// across checkpoints and is folded into `tol` together with the leak and
/// lookup budgets, which keeps the bound honest while staying far below
/// what pure extrapolation can certify.
Bounded restricted_green_dp_certified(const PointSet& A, const Point& a,
                                      const Point& b, GreenTable& table,
                                      int max_steps = 48);

/// Monte Carlo escape-probability estimate from y with decision radius R
/// (walks reaching distance R from A count as escaped) and step budget L
/// (undecided walks count as escaped and enter the bias bound).
struct McEscapeResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double bias_bound = 0.0;  // far-field hit bound + undecided fraction
  uint64_t trials = 0;
  uint64_t captured = 0;
  uint64_t undecided = 0;
};

McEscapeResult mc_escape(const PointSet& A, const Point& y, uint64_t trials,
                         double escape_radius, uint64_t max_len, uint64_t seed,
                         uint64_t stream_base);

/// Reusable escape-sampling state: the membership table and geometry are
/// built once per set and shared across many start points and trials
/// (mc_escape is the one-shot wrapper).  escape_radius <= 0 selects the
/// default 10 x diameter; max_len == 0 selects 50 R^2.
class McEscapeContext {
 public:
  explicit McEscapeContext(const PointSet& A, double escape_radius = 0.0,
                           uint64_t max_len = 0);
  McEscapeResult run(const Point& y, uint64_t trials, uint64_t seed,
                     uint64_t stream_base) const;
  double escape_radius() const { return escape_radius_; }
  uint64_t max_len() const { return max_len_; }
  size_t set_size() const { return size_; }

 private:
  PointMemberTable member_;
  Point center_;
  long near_sq_ = 0;
  long decision_sq_ = 0;
  double escape_radius_ = 0.0;
  uint64_t max_len_ = 0;
  size_t size_ = 0;
};

}  // namespace rwcap
