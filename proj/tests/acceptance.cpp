// Acceptance battery: one line per criterion, pinned tolerances, nonzero
// exit status if any line fails.  Each line reports the measured quantity,
// the pinned threshold, and the elapsed time, so a log of this binary is a
// complete audit of the release gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "rwcap/capacity.hpp"
#include "rwcap/crossterm.hpp"
#include "rwcap/experiments.hpp"
#include "rwcap/gn.hpp"
#include "rwcap/green.hpp"
#include "rwcap/lattice.hpp"
#include "rwcap/rng.hpp"
#include "rwcap/walk.hpp"

using namespace rwcap;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

double elapsed() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - g_t0)
      .count();
}

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("[%s] %02d %-24s %s  (t=%.1fs)\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str(), elapsed());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

PointSet random_set(CounterRng& rng, int count, int radius) {
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) {
    Point p;
    for (int d = 0; d < 4; ++d) {
      p[d] = static_cast<int>(
                 rng.next_below(static_cast<uint64_t>(2 * radius + 1))) -
             radius;
    }
    pts.push_back(p);
  }
  return PointSet(std::move(pts));
}

// --- 1: the convolutional square root squares back to G_D -----------------

void criterion_sqrt_convolution(GreenTable& table) {
  const int box = 14;  // convolution box; truncation bound derived below
  table.prefill(box + 3, true);
  // Unique orbit representatives of the ||z||_inf <= 3 test box.
  std::set<Point> reps;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b)
      for (int c = -3; c <= 3; ++c)
        for (int d = -3; d <= 3; ++d)
          reps.insert(canonical_orbit(Point{a, b, c, d}));
  double max_diff = 0.0, l1 = 0.0;
  for (int a = -box; a <= box; ++a)
    for (int b = -box; b <= box; ++b)
      for (int c = -box; c <= box; ++c)
        for (int d = -box; d <= box; ++d)
          l1 += table.green_sqrt(Point{a, b, c, d});
  for (const Point& z : reps) {
    double conv = 0.0;
    for (int a = -box; a <= box; ++a)
      for (int b = -box; b <= box; ++b)
        for (int c = -box; c <= box; ++c)
          for (int d = -box; d <= box; ++d) {
            Point w{a, b, c, d};
            conv += table.green_sqrt(w) * table.green_sqrt(z - w);
          }
    max_diff = std::max(max_diff, std::abs(conv - table.green(z)));
  }
  // Tail of the truncated convolution: both factors decay like 2 c3 / r^3,
  // so the missing mass is <= 1.25 * (2 c3)^2 * pi^2 / ((box-3) * box)
  // (radial integral of r^-6 over r > box, offset by ||z||_inf <= 3).
  double c = 2.0 * kContinuumSqrtConst;
  double tail = 1.25 * c * c * M_PI * M_PI / ((box - 3.0) * box);
  double lookup = 2.0 * l1 * table.green_tol();
  bool pass = max_diff <= 1e-3 && tail + lookup <= 1e-3;
  report(1, "sqrt-convolution", pass,
         fmt("max |(g~*g~)(z) - G(z)| = %.3e over ||z||_inf<=3; truncation+lookup "
             "bound %.3e; threshold 1e-3",
             max_diff, tail + lookup));
}

// --- 2: Green matrices are uniformly well conditioned ---------------------

void criterion_min_eigenvalue(GreenTable& table) {
  CounterRng rng(1001, 0);
  int violations = 0;
  double worst = 1e300;
  for (int t = 0; t < 100; ++t) {
    int count = 1 + static_cast<int>(rng.next_below(20));
    PointSet A = random_set(rng, count, 6);
    double lam = min_eigenvalue(green_matrix(A, table));
    worst = std::min(worst, lam);
    if (lam <= 0.5) ++violations;
  }
  report(2, "green-matrix-spectrum", violations == 0,
         fmt("min eigenvalue over 100 random sets (<=20 pts) = %.6f; required "
             "> 0.5; violations %d",
             worst, violations));
}

// --- 3: two independent routes to G_D(0) and Cap({0}) ---------------------

void criterion_origin_routes(GreenTable& table) {
  Bounded series = green_d_series(kOrigin, 20000);
  QuadResult quad = green_d_quadrature(kOrigin, 1e-8, 160);
  double route_diff = std::abs(series.value - quad.value);
  PointSet origin(std::vector<Point>{kOrigin});
  double exact = 1.0 / table.green(kOrigin);
  McEscapeResult mc = mc_escape(origin, kOrigin, 1000000, 25.0, 0, 424242, 0);
  double window = 3.0 * mc.std_error + mc.bias_bound;
  bool pass = route_diff <= 1e-6 && quad.converged &&
              std::abs(mc.estimate - exact) <= window;
  report(3, "origin-cross-check", pass,
         fmt("|series - quadrature| at 0 = %.2e (<=1e-6); |mc - 1/G(0)| = "
             "%.2e vs 3se+bias = %.2e at 1e6 trials",
             route_diff, std::abs(mc.estimate - exact), window));
}

// --- 4: cross-term decomposition identity on random range pairs -----------

void criterion_crossterm_identity(GreenTable& table) {
  int violations = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 50; ++i) {
    CounterRng rng(4000 + static_cast<uint64_t>(i), 0);
    size_t len1 = 20 + rng.next_below(31);
    size_t len2 = 20 + rng.next_below(31);
    int span = (i % 2 == 0) ? 3 : 8;
    Point shift;
    for (int d = 0; d < 4; ++d) {
      shift[d] = static_cast<int>(
                     rng.next_below(static_cast<uint64_t>(2 * span + 1))) -
                 span;
    }
    PointSet A = range_of(sample_walk(len1, 4100 + i, 0), 1, len1);
    PointSet B =
        range_of(sample_walk(len2, 4100 + i, 1), 1, len2).translated(shift);
    CrossTermReport r = cross_term_report(A, B, table);
    double budget = 10.0 * r.tolerance;
    if (std::abs(r.residual) > budget) ++violations;
    if (r.tolerance > 0.0) {
      worst_ratio = std::max(worst_ratio, std::abs(r.residual) / r.tolerance);
    }
  }
  report(4, "crossterm-identity", violations == 0,
         fmt("|chi - (2TL - chi'_AB - chi'_BA)| over 50 random range pairs: "
             "worst = %.2f x tolerance; budget 10x; violations %d",
             worst_ratio, violations));
}

// --- 5: restricted Green's function, solve vs certified absorption --------

void criterion_restricted_green(GreenTable& table) {
  CounterRng rng(5005, 0);
  double worst_diff = 0.0, worst_tol = 0.0;
  int violations = 0;
  for (int t = 0; t < 8; ++t) {
    int count = 1 + static_cast<int>(rng.next_below(8));
    PointSet A = random_set(rng, count, 3);
    Point a = A[rng.next_below(A.size())];
    Point b;
    do {
      for (int d = 0; d < 4; ++d) {
        b[d] = a[d] + static_cast<int>(rng.next_below(11)) - 5;
      }
    } while (A.index_of(b) >= 0 || (b - a).norm2() < 2.0);
    double exact = restricted_green(A, a, b, table);
    Bounded cert = restricted_green_dp_certified(A, a, b, table, 48);
    worst_diff = std::max(worst_diff, std::abs(exact - cert.value));
    worst_tol = std::max(worst_tol, cert.tol);
    if (std::abs(exact - cert.value) > 1e-6 || cert.tol >= 1e-7) ++violations;
  }
  report(5, "restricted-green", violations == 0,
         fmt("8 random sets (<=8 pts): max |solve - absorption| = %.2e "
             "(<=1e-6), max certified tol = %.2e (<1e-7)",
             worst_diff, worst_tol));
}

// --- 6: spherical mean value property of the continuum kernel -------------

void criterion_mean_value() {
  CounterRng rng(6006, 0);
  int violations = 0;
  double worst_sigmas = 0.0;
  for (int t = 0; t < 20; ++t) {
    double r, s;
    do {
      r = 0.5 + 4.5 * rng.next_double();
      s = 0.5 + 4.5 * rng.next_double();
    } while (std::abs(r - s) < 0.25 * std::max(r, s));
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      RPoint x{}, y{};
      for (int d = 0; d < 4; d += 2) {
        double u1 = 1.0 - rng.next_double(), u2 = rng.next_double();
        double m = std::sqrt(-2.0 * std::log(u1));
        x[d] = m * std::cos(2.0 * M_PI * u2);
        x[d + 1] = m * std::sin(2.0 * M_PI * u2);
        u1 = 1.0 - rng.next_double();
        u2 = rng.next_double();
        m = std::sqrt(-2.0 * std::log(u1));
        y[d] = m * std::cos(2.0 * M_PI * u2);
        y[d + 1] = m * std::sin(2.0 * M_PI * u2);
      }
      RPoint xs = scaled(x, r / rnorm(x)), ys = scaled(y, s / rnorm(y));
      double v = continuum_green(
          RPoint{xs[0] - ys[0], xs[1] - ys[1], xs[2] - ys[2], xs[3] - ys[3]});
      sum += v;
      sumsq += v * v;
    }
    double mean = sum / n;
    double var = std::max(0.0, sumsq / n - mean * mean);
    double se = std::sqrt(var / (n - 1.0));
    double sig = std::abs(mean - mean_value_kernel(r, s)) / se;
    worst_sigmas = std::max(worst_sigmas, sig);
    if (sig > 3.0) ++violations;
  }
  report(6, "mean-value-property", violations == 0,
         fmt("20 random (r,s): spherical MC mean of G vs 1/(2 pi^2 max^2), "
             "worst deviation %.2f se (limit 3); violations %d",
             worst_sigmas, violations));
}

// --- 7 & 8: variational constant and derived rate function ----------------

void criterion_variational(GNResult& out) {
  out = maximize_ratio();
  bool grids_ok = out.refinement_history.size() >= 2;
  double rel = 1.0;
  if (grids_ok) {
    double a = out.refinement_history.front().second;
    double b = out.refinement_history.back().second;
    rel = std::abs(b - a) / b;
    grids_ok = out.refinement_history.front().first == 200 &&
               out.refinement_history.back().first == 400 && rel <= 0.01;
  }
  CounterRng rng(7007, 0);
  int ratio_violations = 0;
  double worst_grad = 0.0;
  for (int t = 0; t < 100; ++t) {
    RadialProfile f = RadialProfile::log_grid(200);
    for (size_t i = 0; i < f.radii.size(); ++i) {
      double r = f.radii[i];
      f.values[i] = std::exp(-r * r * (0.5 + rng.next_double())) *
                    (0.5 + rng.next_double());
    }
    f.values.back() = 0.0;
    if (gn_ratio(f) > out.kappa + 1e-12) ++ratio_violations;
    std::vector<double> g = gn_ratio_gradient(f);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    const double h = 1e-6;
    for (size_t i = 0; i + 1 < f.values.size(); i += 5) {
      double save = f.values[i];
      f.values[i] = save + h;
      double up = gn_ratio(f);
      f.values[i] = save - h;
      double dn = gn_ratio(f);
      f.values[i] = save;
      worst_grad = std::max(
          worst_grad, std::abs((up - dn) / (2.0 * h) - g[i]) / gmax);
    }
  }
  bool pass = out.converged && grids_ok && ratio_violations == 0 &&
              worst_grad < 1e-6;
  report(7, "variational-constant", pass,
         fmt("kappa = %.10f; grid 200 vs 400 rel diff %.2e (<=1%%); trial "
             "ratios above kappa: %d; worst gradient check %.2e (<1e-6)",
             out.kappa, rel, ratio_violations, worst_grad));
}

void criterion_rate_function(const GNResult& gn) {
  DeviationConstants dc = deviation_constants(gn.kappa, 1.0);
  double err = std::abs(dc.i4 * dc.lil - 1.0);
  report(8, "rate-lil-duality", err < 1e-14,
         fmt("|I4(1) * lil - 1| = %.2e (< 1e-14)", err));
}

// --- 9: block cross-term dominance and moment consistency -----------------

void criterion_tl_moments() {
  ExperimentRecord r = tl_moment_check(4096, 3, 200, 31);
  int violations = r.estimates.at("dominance_violations").get<int>();
  std::vector<double> c = r.estimates.at("c_hat").get<std::vector<double>>();
  double cmin = *std::min_element(c.begin(), c.end());
  double cmax = *std::max_element(c.begin(), c.end());
  bool pass = violations == 0 && cmax <= 3.0 * cmin;
  report(9, "tl-moment-dominance", pass,
         fmt("n=4096, 200 samples: TL' >= TL violations %d (need 0); "
             "C_1..C_3 = %.4f / %.4f / %.4f, spread %.2fx (limit 3x)",
             violations, c[0], c[1], c[2], cmax / cmin));
}

// --- 10: empirical lower-tail rate is monotone and near-linear ------------

void criterion_lower_tail() {
  ExperimentRecord r = lower_tail_experiment(
      100000, {0.5, 1.0, 1.5, 2.0, 2.5}, 0, 10000, 51);
  bool monotone = r.estimates.at("rho_monotone").get<bool>();
  double corr = r.estimates.at("fit_corr").get<double>();
  bool tail_ok = true;
  for (bool f :
       r.estimates.at("insufficient_tail_mass").get<std::vector<bool>>()) {
    tail_ok = tail_ok && !f;
  }
  bool pass = monotone && corr >= 0.9 && tail_ok;
  report(10, "lower-tail-rate", pass,
         fmt("n=1e5, 1e4 samples, 5 lambdas: rho monotone %s, linear fit "
             "corr %.4f (>=0.9), tail mass ok %s",
             monotone ? "yes" : "no", corr, tail_ok ? "yes" : "no"));
}

// --- 11: Green sums along walks grow like log n; nonintersection level ----

void criterion_bridge_and_nonintersection() {
  std::vector<ExperimentRecord> br = bridge_bound_check(
      {256, 512, 1024, 2048, 4096, 8192, 16384}, 100, 71);
  const ExperimentRecord& fit = br.back();
  double slope = fit.estimates.at("fit_slope").get<double>();
  double corr = fit.estimates.at("fit_corr").get<double>();
  ExperimentRecord ni = nonintersection_curve({100000}, 200, 61)[0];
  double norm = ni.estimates.at("normalized").get<double>();
  bool pass = slope > 0.0 && std::isfinite(slope) && corr >= 0.9 &&
              norm >= 0.5 && norm <= 1.5;
  report(11, "log-growth-scaling", pass,
         fmt("E[sum G(S_i - z)] vs log n: slope %.4f (>0), corr %.4f "
             "(>=0.9); normalized nonintersection at n=1e5: %.3f (in "
             "[0.5,1.5])",
             slope, corr, norm));
}

// --- 12: every experiment kind replays bit-identically --------------------

void criterion_replay() {
  std::vector<ExperimentRecord> records;
  records.push_back(expected_capacity_curve({64}, 8, 7)[0]);
  records.push_back(nonintersection_curve({64}, 8, 7)[0]);
  records.push_back(lower_tail_experiment(256, {0.05, 0.1}, 0, 64, 7));
  records.push_back(tl_moment_check(64, 2, 4, 7));
  records.push_back(bridge_bound_check({64}, 6, 7)[0]);
  int mismatches = 0;
  for (const ExperimentRecord& r : records) {
    if (!replay_matches(r)) ++mismatches;
  }
  report(12, "replay-determinism", mismatches == 0,
         fmt("replayed all 5 experiment kinds from their records: %d "
             "mismatches (need 0)",
             mismatches));
}

}  // namespace

int main() {
  g_t0 = std::chrono::steady_clock::now();
  std::printf("acceptance battery (%s)\n", kCodeVersion);
  GreenTable table;
  criterion_sqrt_convolution(table);
  criterion_min_eigenvalue(table);
  criterion_origin_routes(table);
  criterion_crossterm_identity(table);
  criterion_restricted_green(table);
  criterion_mean_value();
  GNResult gn;
  criterion_variational(gn);
  criterion_rate_function(gn);
  criterion_tl_moments();
  criterion_lower_tail();
  criterion_bridge_and_nonintersection();
  criterion_replay();
  std::printf("%s: %d of 12 criteria failed (t=%.1fs)\n",
              g_failures == 0 ? "OK" : "FAILURES", g_failures, elapsed());
  return g_failures == 0 ? 0 : 1;
}
