#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rwcap/lattice.hpp"

namespace rwcap {

/// A point of R^4.
using RPoint = std::array<double, 4>;

double rnorm(const RPoint& x);
RPoint scaled(const RPoint& x, double c);

/// Taylor coefficient C_k of (1-x)^{-1/2}: C_k = binom(2k,k)/4^k.
double sqrt_series_coeff(int k);

/// 1-d SRW: probability of being at x after m +-1 steps.
double one_d_prob(int m, int x);

/// Exact p_k(z) for the Z^4 SRW via the two-plane factorization: steps split
/// Binomial(k,1/2) between coordinate planes {1,2} and {3,4}, and each plane
/// rotates into two independent 1-d walks.
/// Throws std::invalid_argument for k < 0 and a resource error beyond max_k.
double transition_prob(int k, const Point& z, int max_k = 10000);

/// Oracle route: iterated convolution on a box of radius k.  O((2k)^4 k),
/// intended for small k only (cross-checks the closed form in tests).
/// Returned table is indexed by offset+k per coordinate, side 2k+1.
std::vector<double> transition_table_box(int k);
double transition_table_lookup(const std::vector<double>& table, int k, const Point& z);

/// Continuum kernels in R^4 (standard Brownian normalization).
/// G(x) = 1/(2 pi^2 |x|^2); its convolutional square root is c3/|x|^3 with
/// c3 = 2^{-3/2} pi^{-2}, pinned by (G~ * G~) = G.
inline constexpr double kContinuumSqrtConst = 0.03582244801567227;  // 1/(2^{3/2} pi^2)
double continuum_green(const RPoint& x);
double continuum_green_sqrt(const RPoint& x);

/// A value together with a certified error bound.
struct Bounded {
  double value = 0.0;
  double tol = 0.0;
};

/// Partial sum S_K = sum_{k<=K} p_k(z) plus a tail estimate obtained by
/// fitting p_k k^2 = A + B/k over the top half of the window and summing the
/// fitted tail; `value` includes the tail estimate, `tol` bounds its error.
Bounded green_d_series(const Point& z, int cutoff = 20000);

/// Truncated square-root series sum_{k<=K} C_k p_k(z) with an explicit tail
/// bound from C_k <= (pi k)^{-1/2} and the fitted p_k tail.
Bounded green_sqrt_d_series(const Point& z, int cutoff = 5000);

/// Dyadic-refinement midpoint quadrature of the Fourier integrand
/// 1/(1 - (1/4) sum cos(2 pi l_i)), with the |l|^-2 singularity handled
/// analytically in a shrinking core.  Oracle route; seconds per point.
struct QuadResult {
  double value = 0.0;
  double last_diff = 0.0;  // difference of the last two extrapolants
  int levels = 0;
  bool converged = false;
};
QuadResult green_d_quadrature(const Point& z, double quad_tol = 1e-8,
                              int max_points_per_dim = 160);

/// Fast certified evaluator for G_D and its convolutional square root,
/// shared by the bulk table fill.  Integrates the heat-kernel representation
/// e^{-t} prod_i I_{|z_i|}(t/4) on a fixed logarithmic t-grid (scaled Bessel
/// columns via backward recurrence) with an analytic large-t tail.
/// Immutable and safe to share between threads after construction.
class HeatKernelEvaluator {
 public:
  explicit HeatKernelEvaluator(int nodes_per_decade = 96, double t_min = 1e-3,
                               double t_max = 1e6, int v_max = 64);

  double green(const Point& z) const;       // G_D(z)
  double green_sqrt(const Point& z) const;  // G~_D(z)
  /// Abs error bound observed against the exact series on a validation set.
  double tolerance() const { return tol_; }
  int max_coord() const { return v_max_; }

 private:
  void ensure_columns(int v) const;  // grows the Bessel table (not thread-safe)
  double integrate(const Point& z, bool sqrt_weight) const;

  std::vector<double> t_;        // nodes (log-spaced)
  std::vector<double> w_;        // Simpson weights including dt
  mutable std::vector<std::vector<double>> bessel_;  // bessel_[v][node] = e^{-t/4} I_v(t/4)
  mutable int v_max_ = -1;
  double t_max_;
  double tol_ = 0.0;
};

/// Memoized Green values keyed by canonical orbit representative under the
/// 384-element lattice symmetry group.  Built/extended single-threaded; reads
/// of an already-filled table are pure.
class GreenTable {
 public:
  struct Params {
    double quad_tol = 1e-8;
    int series_cutoff = 5000;
    int box_radius = 0;  // prefill radius; 0 = fully on-demand
  };

  GreenTable();
  explicit GreenTable(Params params);

  double green(const Point& z);             // G_D(z), cached
  double green_sqrt(const Point& z);        // G~_D(z), cached
  double transition(int k, const Point& z); // p_k(z), cached
  double green_tol() const { return evaluator_.tolerance(); }
  const Params& params() const { return params_; }

  /// Precompute all orbits with ||z||_inf <= radius.
  void prefill(int radius, bool with_sqrt);

  size_t size() const { return gd_.size() + gsqrt_.size(); }

  /// Versioned binary cache; byte-for-byte reproducible for fixed params.
  void save(const std::string& file) const;
  static GreenTable load(const std::string& file);

 private:
  /// Open-addressing fast path in front of the maps, keyed by the packed
  /// orbit representative (12 bits per sorted coordinate).  The maps remain
  /// the source of truth for serialization; points beyond the packable
  /// coordinate range bypass the fast path.
  class OrbitCache {
   public:
    bool find(uint64_t key, double& out) const {
      if (keys_.empty()) return false;
      size_t i = slot(key);
      while (keys_[i] != 0) {
        if (keys_[i] == key + 1) {
          out = vals_[i];
          return true;
        }
        i = (i + 1) & mask_;
      }
      return false;
    }
    void insert(uint64_t key, double v);

   private:
    size_t slot(uint64_t key) const;
    std::vector<uint64_t> keys_;  // stores key+1; 0 marks an empty slot
    std::vector<double> vals_;
    size_t mask_ = 0;
    size_t count_ = 0;
  };

  Params params_;
  HeatKernelEvaluator evaluator_;
  std::unordered_map<Point, double, PointHash> gd_;
  std::unordered_map<Point, double, PointHash> gsqrt_;
  std::unordered_map<uint64_t, double> p_;
  OrbitCache fast_gd_;
  OrbitCache fast_gsqrt_;
};

/// Far-field helper: G_D(z) ~ 2/(pi^2 |z|^2); used for bias bounds only.
double green_d_far_field(double dist_sq);

/// Residual of the discrete-vs-continuum square-root comparison at scale n.
struct DiscContComparison {
  double discrete_scaled = 0.0;  // n^{3/2} G~_D(round(sqrt(n) z))
  double continuum = 0.0;        // 2 G~(z)
  double residual = 0.0;
  double bound = 0.0;
  bool violation = false;
};
DiscContComparison compare_disc_cont(const RPoint& z, double n, double eps = 0.5,
                                     double slack = 10.0);

}  // namespace rwcap
