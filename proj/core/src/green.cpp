#include "rwcap/green.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace rwcap {

namespace {
constexpr double kPi = std::numbers::pi;

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double binom_pmf_half(int k, int m) {
  // Binomial(k, 1/2) pmf at m.
  if (m < 0 || m > k) return 0.0;
  return std::exp(log_factorial(k) - log_factorial(m) - log_factorial(k - m) -
                  static_cast<double>(k) * std::numbers::ln2);
}
}  // namespace

double rnorm(const RPoint& x) {
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
}

RPoint scaled(const RPoint& x, double c) {
  return {c * x[0], c * x[1], c * x[2], c * x[3]};
}

double sqrt_series_coeff(int k) {
  static std::vector<double> cache{1.0};
  static std::mutex mu;
  std::lock_guard lock(mu);
  while (static_cast<int>(cache.size()) <= k) {
    int n = static_cast<int>(cache.size());
    cache.push_back(cache.back() * (2.0 * n - 1.0) / (2.0 * n));
  }
  return cache[static_cast<size_t>(k)];
}

double one_d_prob(int m, int x) {
  x = std::abs(x);
  if (x > m || ((m ^ x) & 1)) return 0.0;
  int h = (m + x) / 2;
  return std::exp(log_factorial(m) - log_factorial(h) - log_factorial(m - h) -
                  static_cast<double>(m) * std::numbers::ln2);
}

double transition_prob(int k, const Point& z, int max_k) {
  if (k < 0) throw std::invalid_argument("transition_prob: k < 0");
  if (k > max_k) throw std::length_error("transition_prob: k exceeds configured max");
  if ((static_cast<long>(k) - z.norm1()) % 2 != 0 || z.norm1() > k) return 0.0;
  // Rotate each coordinate plane into two independent 1-d walks.
  int u1 = z[0] + z[1], v1 = z[0] - z[1];
  int u2 = z[2] + z[3], v2 = z[2] - z[3];
  double sum = 0.0;
  int m0 = std::abs(u1) & 1;  // parity of the plane-{1,2} step count
  for (int m = m0; m <= k; m += 2) {
    double a = one_d_prob(m, u1) * one_d_prob(m, v1);
    if (a == 0.0) continue;
    double b = one_d_prob(k - m, u2) * one_d_prob(k - m, v2);
    if (b == 0.0) continue;
    sum += binom_pmf_half(k, m) * a * b;
  }
  return sum;
}

std::vector<double> transition_table_box(int k) {
  if (k < 0 || k > 16) throw std::length_error("transition_table_box: k out of budget");
  int side = 2 * k + 1;
  size_t n = 1;
  for (int i = 0; i < 4; ++i) n *= static_cast<size_t>(side);
  std::vector<double> cur(n, 0.0), next(n, 0.0);
  auto idx = [&](int a, int b, int c, int d) {
    return ((static_cast<size_t>(a + k) * side + (b + k)) * side + (c + k)) * side +
           (d + k);
  };
  cur[idx(0, 0, 0, 0)] = 1.0;
  for (int step = 0; step < k; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    int r = step;  // support after `step` steps
    for (int a = -r; a <= r; ++a)
      for (int b = -r; b <= r; ++b)
        for (int c = -r; c <= r; ++c)
          for (int d = -r; d <= r; ++d) {
            double p = cur[idx(a, b, c, d)];
            if (p == 0.0) continue;
            p *= 0.125;
            next[idx(a + 1, b, c, d)] += p;
            next[idx(a - 1, b, c, d)] += p;
            next[idx(a, b + 1, c, d)] += p;
            next[idx(a, b - 1, c, d)] += p;
            next[idx(a, b, c + 1, d)] += p;
            next[idx(a, b, c - 1, d)] += p;
            next[idx(a, b, c, d + 1)] += p;
            next[idx(a, b, c, d - 1)] += p;
          }
    cur.swap(next);
  }
  return cur;
}

double transition_table_lookup(const std::vector<double>& table, int k, const Point& z) {
  if (z.norm_inf() > k) return 0.0;
  int side = 2 * k + 1;
  size_t i = ((static_cast<size_t>(z[0] + k) * side + (z[1] + k)) * side + (z[2] + k)) *
                 side +
             (z[3] + k);
  return table[i];
}

double continuum_green(const RPoint& x) {
  double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
  if (r2 == 0.0) throw std::domain_error("continuum_green: singular at 0");
  return 1.0 / (2.0 * kPi * kPi * r2);
}

double continuum_green_sqrt(const RPoint& x) {
  double r = rnorm(x);
  if (r == 0.0) throw std::domain_error("continuum_green_sqrt: singular at 0");
  return kContinuumSqrtConst / (r * r * r);
}

namespace {

/// p_k(z) for all k = 0..K in one pass: a Pascal-triangle update of the
/// Binomial(k,1/2) row against the two per-plane 1-d profiles.
std::vector<double> transition_profile(const Point& z, int K) {
  int u1 = z[0] + z[1], v1 = z[0] - z[1];
  int u2 = z[2] + z[3], v2 = z[2] - z[3];
  std::vector<double> a(static_cast<size_t>(K) + 1), b(static_cast<size_t>(K) + 1);
  for (int m = 0; m <= K; ++m) {
    a[static_cast<size_t>(m)] = one_d_prob(m, u1) * one_d_prob(m, v1);
    b[static_cast<size_t>(m)] = one_d_prob(m, u2) * one_d_prob(m, v2);
  }
  std::vector<double> p(static_cast<size_t>(K) + 1, 0.0);
  std::vector<double> row(static_cast<size_t>(K) + 1, 0.0), prev(static_cast<size_t>(K) + 1, 0.0);
  prev[0] = 1.0;
  p[0] = a[0] * b[0];
  int ma_par = std::abs(u1) & 1;
  for (int k = 1; k <= K; ++k) {
    row[0] = 0.5 * prev[0];
    for (int m = 1; m < k; ++m) row[static_cast<size_t>(m)] = 0.5 * (prev[static_cast<size_t>(m)] + prev[static_cast<size_t>(m - 1)]);
    row[static_cast<size_t>(k)] = 0.5 * prev[static_cast<size_t>(k - 1)];
    if (((k - z.norm1()) & 1) == 0 && z.norm1() <= k) {
      double s = 0.0;
      for (int m = ma_par; m <= k; m += 2) {
        double am = a[static_cast<size_t>(m)];
        if (am != 0.0) s += row[static_cast<size_t>(m)] * am * b[static_cast<size_t>(k - m)];
      }
      p[static_cast<size_t>(k)] = s;
    }
    row.swap(prev);
  }
  return p;
}

struct TailFit {
  double estimate = 0.0;
  double bound = 0.0;
  double A = 0.0;        // fitted limit of p_k k^2
  double B = 0.0;        // fitted 1/k correction
  double C = 0.0;        // fitted 1/k^2 correction
  double max_dev = 0.0;  // worst fit residual over the window
};

/// Fit p_k k^2 = A + B/k + C/k^2 on [K/2, K] (local CLT form) and sum the
/// fitted tail over k > K with the parity stride.
TailFit fitted_tail(const std::vector<double>& p, const Point& z, int K) {
  int par = static_cast<int>(z.norm1() & 1);
  int k0 = std::max(2, K / 2);
  if ((k0 & 1) != par) ++k0;
  // 3x3 normal equations for basis {1, u, u^2} with u = k0/k in (0,1],
  // which keeps the system well conditioned; A,B,C are rescaled after.
  double m[3][3] = {};
  double r[3] = {};
  for (int k = k0; k <= K; k += 2) {
    double y = p[static_cast<size_t>(k)] * static_cast<double>(k) * static_cast<double>(k);
    double x = static_cast<double>(k0) / k;
    double phi[3] = {1.0, x, x * x};
    for (int i = 0; i < 3; ++i) {
      r[i] += phi[i] * y;
      for (int j = 0; j < 3; ++j) m[i][j] += phi[i] * phi[j];
    }
  }
  // Gaussian elimination with partial pivoting.
  double c[3];
  {
    int pi[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
      int best = col;
      for (int row = col + 1; row < 3; ++row)
        if (std::abs(m[pi[row]][col]) > std::abs(m[pi[best]][col])) best = row;
      std::swap(pi[col], pi[best]);
      for (int row = col + 1; row < 3; ++row) {
        double f = m[pi[row]][col] / m[pi[col]][col];
        for (int j = col; j < 3; ++j) m[pi[row]][j] -= f * m[pi[col]][j];
        r[pi[row]] -= f * r[pi[col]];
      }
    }
    for (int col = 2; col >= 0; --col) {
      double acc = r[pi[col]];
      for (int j = col + 1; j < 3; ++j) acc -= m[pi[col]][j] * c[j];
      c[col] = acc / m[pi[col]][col];
    }
  }
  double A = c[0];
  double B = c[1] * k0;
  double C = c[2] * static_cast<double>(k0) * k0;
  double max_dev = 0.0;
  for (int k = k0; k <= K; k += 2) {
    double y = p[static_cast<size_t>(k)] * static_cast<double>(k) * static_cast<double>(k);
    double x = 1.0 / k;
    max_dev = std::max(max_dev, std::abs(y - (A + B * x + C * x * x)));
  }
  double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  long stop = std::max(2L * K, 2000000L);
  long k_first = K + 1 + ((K + 1 - par) & 1);  // first k > K with k = par mod 2
  for (long k = k_first; k <= stop; k += 2) {
    double ik = 1.0 / static_cast<double>(k);
    s2 += ik * ik;
    s3 += ik * ik * ik;
    s4 += ik * ik * ik * ik;
  }
  double st = static_cast<double>(stop);
  s2 += 0.5 / st;  // integral remainder, stride 2
  s3 += 0.25 / (st * st);
  s4 += 1.0 / (6.0 * st * st * st);
  TailFit out;
  out.estimate = A * s2 + B * s3 + C * s4;
  // The quadratic fit leaves an O(k^-3) model error; inside the window it is
  // bounded by max_dev and it only decays beyond, so max_dev * s2 covers it
  // (with a safety factor).  The C-term margin guards coefficient error.
  out.bound = 4.0 * max_dev * s2 + 4.0 * std::abs(C) * s4;
  out.A = A;
  out.B = B;
  out.C = C;
  out.max_dev = max_dev;
  return out;
}

}  // namespace

Bounded green_d_series(const Point& z, int cutoff) {
  auto p = transition_profile(z, cutoff);
  double sum = 0.0;
  for (double v : p) sum += v;
  TailFit tail = fitted_tail(p, z, cutoff);
  return {sum + tail.estimate, tail.bound + 1e-13 * sum};
}

Bounded green_sqrt_d_series(const Point& z, int cutoff) {
  auto p = transition_profile(z, cutoff);
  double sum = 0.0;
  for (int k = 0; k <= cutoff; ++k) sum += sqrt_series_coeff(k) * p[static_cast<size_t>(k)];
  // Tail of sum C_k p_k with the same A + B/k fit for p_k k^2, but with the
  // exact C_k weights: needs sum_{k>K} C_k k^-2 and C_k k^-3.
  TailFit fit = fitted_tail(p, z, cutoff);
  long stop = std::max(2L * cutoff, 2000000L);
  double c = sqrt_series_coeff(cutoff);
  double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (long k = cutoff + 1; k <= stop; ++k) {
    c *= (2.0 * k - 1.0) / (2.0 * k);
    if (((k - z.norm1()) & 1) != 0) continue;
    double ik = 1.0 / static_cast<double>(k);
    s2 += c * ik * ik;
    s3 += c * ik * ik * ik;
    s4 += c * ik * ik * ik * ik;
  }
  double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  double st = static_cast<double>(stop);
  s2 += inv_sqrt_pi * std::pow(st, -1.5) / 3.0;  // C_k ~ (pi k)^{-1/2}, stride 2
  s3 += inv_sqrt_pi * std::pow(st, -2.5) / 5.0;
  s4 += inv_sqrt_pi * std::pow(st, -3.5) / 7.0;
  double tail = fit.A * s2 + fit.B * s3 + fit.C * s4;
  double bound = 4.0 * fit.max_dev * s2 + 4.0 * std::abs(fit.C) * s4;
  return {sum + tail, bound + 1e-13 * sum};
}

// ---------------------------------------------------------------------------
// HeatKernelEvaluator
// ---------------------------------------------------------------------------

namespace {

/// Scaled Bessel column e^{-x} I_v(x), v = 0..v_max, by backward (Miller)
/// recurrence normalized with sum_v I_v(x) = e^x over all integer v.
std::vector<double> scaled_bessel_column(double x, int v_max) {
  std::vector<double> out(static_cast<size_t>(v_max) + 1, 0.0);
  if (x <= 0.0) {
    out[0] = 1.0;
    return out;
  }
  int start = v_max + 40 + static_cast<int>(std::ceil(std::sqrt(80.0 * x)));
  double f_hi = 0.0, f_mid = 1e-290;
  double sum = 0.0;
  for (int v = start; v >= 0; --v) {
    if (v <= v_max) out[static_cast<size_t>(v)] = f_mid;
    sum += (v == 0) ? f_mid : 2.0 * f_mid;
    double f_lo = f_hi + (2.0 * (v) / x) * f_mid;
    if (v == 0) break;
    if (std::abs(f_lo) > 1e260) {
      f_lo *= 1e-260;
      f_mid *= 1e-260;
      sum *= 1e-260;
      for (double& o : out) o *= 1e-260;
    }
    f_hi = f_mid;
    f_mid = f_lo;
  }
  for (double& o : out) o /= sum;
  return out;
}

/// e^{-x} I_v(x) by the ascending series; fine for small x.
double scaled_bessel_series(double x, int v) {
  if (x == 0.0) return v == 0 ? 1.0 : 0.0;
  double lt = static_cast<double>(v) * std::log(0.5 * x) - std::lgamma(v + 1.0) - x;
  if (lt < -700.0) return 0.0;
  double term = std::exp(lt);
  double sum = term;
  double q = 0.25 * x * x;
  for (int j = 1; j < 200; ++j) {
    term *= q / (static_cast<double>(j) * (j + v));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

/// Coefficients d_0..d_3 of prod_i S_{v_i}(x) ~ sum d_j (8x)^{-j} from the
/// large-argument Bessel expansion.
std::array<double, 4> tail_poly(const Point& z) {
  std::array<double, 4> prod{1.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    double mu = 4.0 * static_cast<double>(z[i]) * static_cast<double>(z[i]);
    std::array<double, 4> s{1.0, -(mu - 1.0), (mu - 1.0) * (mu - 9.0) / 2.0,
                            -(mu - 1.0) * (mu - 9.0) * (mu - 25.0) / 6.0};
    std::array<double, 4> next{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; a + b < 4; ++b) next[static_cast<size_t>(a + b)] += prod[static_cast<size_t>(a)] * s[static_cast<size_t>(b)];
    prod = next;
  }
  return prod;
}

}  // namespace

HeatKernelEvaluator::HeatKernelEvaluator(int nodes_per_decade, double t_min,
                                         double t_max, int v_max)
    : t_max_(t_max) {
  double u0 = std::log(t_min), u1 = std::log(t_max);
  int decades = static_cast<int>(std::ceil((u1 - u0) / std::numbers::ln10));
  int n = decades * nodes_per_decade;
  if (n % 2) ++n;  // composite Simpson needs an even interval count
  double h = (u1 - u0) / n;
  t_.resize(static_cast<size_t>(n) + 1);
  w_.resize(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    double u = u0 + h * i;
    double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    t_[static_cast<size_t>(i)] = std::exp(u);
    w_[static_cast<size_t>(i)] = c * (h / 3.0) * t_[static_cast<size_t>(i)];  // du-measure Jacobian
  }
  ensure_columns(v_max);

  // Certify against the exact series at a small validation battery.
  double worst = 0.0;
  for (const Point& z : {Point{0, 0, 0, 0}, Point{1, 0, 0, 0}, Point{1, 1, 0, 0},
                         Point{2, 1, 1, 0}, Point{3, 0, 0, 0}, Point{5, 2, 1, 1}}) {
    Bounded ref = green_d_series(z, 4000);
    worst = std::max(worst, std::abs(green(z) - ref.value) + ref.tol);
    Bounded refs = green_sqrt_d_series(z, 4000);
    worst = std::max(worst, std::abs(green_sqrt(z) - refs.value) + refs.tol);
  }
  tol_ = worst;
}

void HeatKernelEvaluator::ensure_columns(int v) const {
  if (v <= v_max_) return;
  bessel_.assign(t_.size(), {});
  for (size_t i = 0; i < t_.size(); ++i)
    bessel_[i] = scaled_bessel_column(0.25 * t_[i], v);
  v_max_ = v;
}

double HeatKernelEvaluator::integrate(const Point& z, bool sqrt_weight) const {
  Point a = canonical_orbit(z);
  ensure_columns(a[0]);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  double sum = 0.0;
  for (size_t i = 0; i < t_.size(); ++i) {
    const auto& col = bessel_[i];
    double f = col[static_cast<size_t>(a[0])] * col[static_cast<size_t>(a[1])] *
               col[static_cast<size_t>(a[2])] * col[static_cast<size_t>(a[3])];
    if (sqrt_weight) f *= inv_sqrt_pi / std::sqrt(t_[i]);
    sum += w_[i] * f;
  }
  // Head [0, t_min]: substitution t = s^2 keeps the sqrt weight regular.
  double t0 = t_.front();
  {
    auto head_f = [&](double t) {
      double x = 0.25 * t;
      return scaled_bessel_series(x, a[0]) * scaled_bessel_series(x, a[1]) *
             scaled_bessel_series(x, a[2]) * scaled_bessel_series(x, a[3]);
    };
    int m = 16;
    if (sqrt_weight) {
      double smax = std::sqrt(t0), hs = smax / m, acc = 0.0;
      for (int j = 0; j <= m; ++j) {
        double s = hs * j;
        double c = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        acc += c * head_f(s * s);
      }
      sum += 2.0 * inv_sqrt_pi * acc * hs / 3.0;
    } else {
      double ht = t0 / m, acc = 0.0;
      for (int j = 0; j <= m; ++j) {
        double c = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        acc += c * head_f(ht * j);
      }
      sum += acc * ht / 3.0;
    }
  }
  // Analytic tail beyond t_max: integrand ~ (4/pi^2) t^-2 sum_j d_j (2t)^-j
  // from the large-argument Bessel expansion ((8x)^-j with x = t/4).
  auto d = tail_poly(a);
  double T = t_max_;
  double tail = 0.0;
  for (int j = 0; j < 4; ++j) {
    double pw = d[static_cast<size_t>(j)] * std::pow(2.0 * T, -j);
    tail += sqrt_weight ? pw / ((j + 1.5) * std::sqrt(T)) : pw / (j + 1.0);
  }
  sum += (4.0 / (kPi * kPi)) * (sqrt_weight ? inv_sqrt_pi : 1.0) * tail / T;
  return sum;
}

double HeatKernelEvaluator::green(const Point& z) const { return integrate(z, false); }
double HeatKernelEvaluator::green_sqrt(const Point& z) const { return integrate(z, true); }

// ---------------------------------------------------------------------------
// GreenTable
// ---------------------------------------------------------------------------

GreenTable::GreenTable() : GreenTable(Params{}) {}

GreenTable::GreenTable(Params params)
    : params_(params), evaluator_(96, 1e-3, 1e6, 32) {
  if (params_.box_radius > 0) prefill(params_.box_radius, true);
}

namespace {
// Canonical orbits have sorted nonnegative coordinates; 12 bits each covers
// every realistic working set.  Returns ~0 when not packable.
inline uint64_t pack_orbit(const Point& key) {
  if (key[0] >= 4095) return ~uint64_t{0};
  return (static_cast<uint64_t>(key[0]) << 36) |
         (static_cast<uint64_t>(key[1]) << 24) |
         (static_cast<uint64_t>(key[2]) << 12) | static_cast<uint64_t>(key[3]);
}
}  // namespace

size_t GreenTable::OrbitCache::slot(uint64_t key) const {
  uint64_t h = key + 1;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return static_cast<size_t>(h ^ (h >> 31)) & mask_;
}

void GreenTable::OrbitCache::insert(uint64_t key, double v) {
  if (keys_.empty()) {
    keys_.assign(1 << 16, 0);
    vals_.assign(1 << 16, 0.0);
    mask_ = keys_.size() - 1;
  } else if (2 * (count_ + 1) > keys_.size()) {
    std::vector<uint64_t> ok = std::move(keys_);
    std::vector<double> ov = std::move(vals_);
    keys_.assign(ok.size() * 2, 0);
    vals_.assign(ov.size() * 2, 0.0);
    mask_ = keys_.size() - 1;
    count_ = 0;
    for (size_t i = 0; i < ok.size(); ++i) {
      if (ok[i] != 0) insert(ok[i] - 1, ov[i]);
    }
  }
  size_t i = slot(key);
  while (keys_[i] != 0) {
    if (keys_[i] == key + 1) return;
    i = (i + 1) & mask_;
  }
  keys_[i] = key + 1;
  vals_[i] = v;
  ++count_;
}

double GreenTable::green(const Point& z) {
  Point key = canonical_orbit(z);
  uint64_t pk = pack_orbit(key);
  if (pk != ~uint64_t{0}) {
    double v;
    if (fast_gd_.find(pk, v)) return v;
    v = evaluator_.green(key);
    fast_gd_.insert(pk, v);
    gd_.emplace(key, v);
    return v;
  }
  auto it = gd_.find(key);
  if (it != gd_.end()) return it->second;
  double v = evaluator_.green(key);
  gd_.emplace(key, v);
  return v;
}

double GreenTable::green_sqrt(const Point& z) {
  Point key = canonical_orbit(z);
  uint64_t pk = pack_orbit(key);
  if (pk != ~uint64_t{0}) {
    double v;
    if (fast_gsqrt_.find(pk, v)) return v;
    v = evaluator_.green_sqrt(key);
    fast_gsqrt_.insert(pk, v);
    gsqrt_.emplace(key, v);
    return v;
  }
  auto it = gsqrt_.find(key);
  if (it != gsqrt_.end()) return it->second;
  double v = evaluator_.green_sqrt(key);
  gsqrt_.emplace(key, v);
  return v;
}

double GreenTable::transition(int k, const Point& z) {
  Point key = canonical_orbit(z);
  uint64_t pk = (static_cast<uint64_t>(static_cast<uint32_t>(k)) << 44) ^
                (static_cast<uint64_t>(static_cast<uint32_t>(key[0])) << 33) ^
                (static_cast<uint64_t>(static_cast<uint32_t>(key[1])) << 22) ^
                (static_cast<uint64_t>(static_cast<uint32_t>(key[2])) << 11) ^
                static_cast<uint64_t>(static_cast<uint32_t>(key[3]));
  auto it = p_.find(pk);
  if (it != p_.end()) return it->second;
  double v = transition_prob(k, key);
  p_.emplace(pk, v);
  return v;
}

void GreenTable::prefill(int radius, bool with_sqrt) {
  for (int a = 0; a <= radius; ++a)
    for (int b = 0; b <= a; ++b)
      for (int c = 0; c <= b; ++c)
        for (int d = 0; d <= c; ++d) {
          Point z{a, b, c, d};
          green(z);
          if (with_sqrt) green_sqrt(z);
        }
}

namespace {
constexpr char kTableMagic[8] = {'R', 'W', 'C', 'G', 'R', 'N', '1', '\0'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("green table file truncated");
  return v;
}

void write_map(std::ostream& os, const std::unordered_map<Point, double, PointHash>& m,
               double tol) {
  std::vector<std::pair<Point, double>> entries(m.begin(), m.end());
  std::sort(entries.begin(), entries.end());
  put<uint64_t>(os, entries.size());
  for (const auto& [p, v] : entries) {
    for (int i = 0; i < 4; ++i) put<int32_t>(os, p[i]);
    put<double>(os, v);
    put<double>(os, tol);
  }
}

void read_map(std::istream& is, std::unordered_map<Point, double, PointHash>& m) {
  auto n = get<uint64_t>(is);
  for (uint64_t i = 0; i < n; ++i) {
    Point p;
    for (int j = 0; j < 4; ++j) p[j] = get<int32_t>(is);
    double v = get<double>(is);
    (void)get<double>(is);  // per-entry tolerance; uniform for now
    m.emplace(p, v);
  }
}
}  // namespace

void GreenTable::save(const std::string& file) const {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file);
  os.write(kTableMagic, sizeof kTableMagic);
  put<uint32_t>(os, 1);  // format version
  put<double>(os, params_.quad_tol);
  put<uint32_t>(os, static_cast<uint32_t>(params_.series_cutoff));
  put<uint32_t>(os, static_cast<uint32_t>(params_.box_radius));
  write_map(os, gd_, evaluator_.tolerance());
  write_map(os, gsqrt_, evaluator_.tolerance());
  std::vector<std::pair<uint64_t, double>> pe(p_.begin(), p_.end());
  std::sort(pe.begin(), pe.end());
  put<uint64_t>(os, pe.size());
  for (const auto& [k, v] : pe) {
    put<uint64_t>(os, k);
    put<double>(os, v);
  }
}

GreenTable GreenTable::load(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kTableMagic, 8) != 0)
    throw std::runtime_error("not a green table file");
  auto version = get<uint32_t>(is);
  if (version != 1) throw std::runtime_error("unsupported green table version");
  Params p;
  p.quad_tol = get<double>(is);
  p.series_cutoff = static_cast<int>(get<uint32_t>(is));
  int radius = static_cast<int>(get<uint32_t>(is));
  p.box_radius = 0;  // avoid re-prefilling in the constructor
  GreenTable t(p);
  t.params_.box_radius = radius;
  read_map(is, t.gd_);
  read_map(is, t.gsqrt_);
  for (const auto& [p2, v] : t.gd_) {
    uint64_t pk = pack_orbit(p2);
    if (pk != ~uint64_t{0}) t.fast_gd_.insert(pk, v);
  }
  for (const auto& [p2, v] : t.gsqrt_) {
    uint64_t pk = pack_orbit(p2);
    if (pk != ~uint64_t{0}) t.fast_gsqrt_.insert(pk, v);
  }
  auto n = get<uint64_t>(is);
  for (uint64_t i = 0; i < n; ++i) {
    auto k = get<uint64_t>(is);
    t.p_.emplace(k, get<double>(is));
  }
  return t;
}

double green_d_far_field(double dist_sq) { return 2.0 / (kPi * kPi * dist_sq); }

DiscContComparison compare_disc_cont(const RPoint& z, double n, double eps, double slack) {
  double r = rnorm(z);
  if (r < std::pow(n, -eps / 4.0))
    throw std::domain_error("compare_disc_cont: |z| below validity threshold");
  double sqn = std::sqrt(n);
  Point w;
  for (int i = 0; i < 4; ++i) w[i] = static_cast<int>(std::lround(sqn * z[i]));
  RPoint z_eff{w[0] / sqn, w[1] / sqn, w[2] / sqn, w[3] / sqn};
  static HeatKernelEvaluator eval(96, 1e-3, 3e6, 32);
  DiscContComparison out;
  out.discrete_scaled = std::pow(sqn, 3.0) * eval.green_sqrt(w);
  out.continuum = 2.0 * continuum_green_sqrt(z_eff);
  out.residual = std::abs(out.discrete_scaled - out.continuum);
  double r_eff = rnorm(z_eff);
  out.bound = std::pow(n, 2.5 * eps) / (n * r_eff * r_eff) +
              n * n * std::exp(-std::pow(n, eps / 2.0));
  out.violation = out.residual > slack * out.bound;
  return out;
}

}  // namespace rwcap
