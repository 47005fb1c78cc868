#pragma once

#include <string>

#include "rwcap/capacity.hpp"
#include "rwcap/green.hpp"
#include "rwcap/lattice.hpp"
#include "rwcap/walk.hpp"

namespace rwcap {

/// All cross-terms of a set pair plus the residual of the exact
/// inclusion-exclusion identity chi = 2 TL - chi'(A,B) - chi'(B,A).
struct CrossTermReport {
  double chi = 0.0;
  double tl = 0.0;
  double chi_prime_ab = 0.0;
  double chi_prime_ba = 0.0;
  double residual = 0.0;
  double capacity_split_epsilon = 0.0;
  double tolerance = 0.0;  // accumulated Green/solve tolerance

  std::string to_json() const;
};

/// chi(A,B): both asymmetric lines, every probability an exact solve.
double chi(const PointSet& A, const PointSet& B, GreenTable& table);

/// TL(A,B) = sum_{y in A, z in B} P(R'_y avoids A) G_D(y-z) P(R'_z avoids B).
double tl(const PointSet& A, const PointSet& B, GreenTable& table);

/// Split representation of TL through the convolutional square root:
/// sum_a [sum_y G~_D(y-a) P_A(y)] [sum_z G~_D(z-a) P_B(z)] over an a-box of
/// the given margin around A u B, with the far-tail bound in `tol`.
Bounded tl_split(const PointSet& A, const PointSet& B, GreenTable& table,
                 int box_margin = 16);

/// chi'(A,B) = sum P_A(x1) G_D(x1-x2) P(R'_{x2} avoids B, meets A),
/// the inner probability assembled from restricted Green's functions over B
/// and escape probabilities of A u B (path decomposition at the last
/// A-visit; the diagonal delta is removed so overlapping sets stay exact).
double chi_prime(const PointSet& A, const PointSet& B, GreenTable& table);

/// epsilon(A,B) = Cap(A u B) - Cap(A) - Cap(B) + chi(A,B).
double splitting_residual(const PointSet& A, const PointSet& B, GreenTable& table);

CrossTermReport cross_term_report(const PointSet& A, const PointSet& B,
                                  GreenTable& table);

/// SL of the walk's range S[1,n] and the level-l cross-term
/// Lambda_l = sum_j chi(segment range 2j-1, segment range 2j).
struct SlLambda {
  double sl = 0.0;
  double lambda = 0.0;
};
SlLambda sl_and_lambda(const WalkPath& path, int level, GreenTable& table);

/// TL'_n over two walks: both split into b blocks of n/b steps, summed over
/// all block pairs with per-block escape probabilities.  TL' >= TL.
double tl_prime(const WalkPath& walk1, const WalkPath& walk2, int blocks,
                GreenTable& table);

/// TL_n of two walks (whole ranges).
double tl_of_walks(const WalkPath& walk1, const WalkPath& walk2, GreenTable& table);

}  // namespace rwcap
