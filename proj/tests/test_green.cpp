#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "rwcap/green.hpp"

using namespace rwcap;

namespace {
// Frozen reference values (computed independently and pinned).
constexpr double kG0 = 1.2394671218;        // G_D(0), abs tol 1e-9
constexpr double kCapOrigin = 0.8067983268; // 1 / G_D(0)
}  // namespace

TEST_SUITE("green") {

TEST_CASE("square-root series coefficients") {
  CHECK(sqrt_series_coeff(0) == doctest::Approx(1.0));
  CHECK(sqrt_series_coeff(1) == doctest::Approx(0.5));
  CHECK(sqrt_series_coeff(2) == doctest::Approx(0.375));
  // Recurrence C_k = C_{k-1} (2k-1)/(2k).
  for (int k = 1; k <= 300; ++k) {
    CHECK(sqrt_series_coeff(k) ==
          doctest::Approx(sqrt_series_coeff(k - 1) * (2.0 * k - 1) / (2.0 * k))
              .epsilon(1e-12));
  }
  // (1-x)^{-1/2} squared is the geometric series: sum_j C_j C_{k-j} = 1.
  for (int k = 0; k <= 60; ++k) {
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += sqrt_series_coeff(j) * sqrt_series_coeff(k - j);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("one-dimensional walk probabilities") {
  CHECK(one_d_prob(0, 0) == doctest::Approx(1.0));
  CHECK(one_d_prob(4, 0) == doctest::Approx(6.0 / 16.0));
  CHECK(one_d_prob(4, 2) == doctest::Approx(4.0 / 16.0));
  CHECK(one_d_prob(4, 1) == doctest::Approx(0.0));  // parity
  CHECK(one_d_prob(3, 5) == doctest::Approx(0.0));  // out of range
  for (int m : {1, 7, 20}) {
    double total = 0.0;
    for (int x = -m; x <= m; ++x) total += one_d_prob(m, x);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("transition probabilities match the convolution oracle") {
  for (int k = 0; k <= 5; ++k) {
    std::vector<double> box = transition_table_box(k);
    double total = 0.0;
    Point z;
    for (z[0] = -k; z[0] <= k; ++z[0])
      for (z[1] = -k; z[1] <= k; ++z[1])
        for (z[2] = -k; z[2] <= k; ++z[2])
          for (z[3] = -k; z[3] <= k; ++z[3]) {
            double oracle = transition_table_lookup(box, k, z);
            double closed = transition_prob(k, z);
            CHECK(std::abs(closed - oracle) <= 1e-14);
            total += closed;
          }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS(transition_prob(-1, kOrigin));
}

TEST_CASE("series value at the origin matches the frozen reference") {
  Bounded g0 = green_d_series(kOrigin);
  CHECK(g0.tol < 1e-9);
  CHECK(std::abs(g0.value - kG0) < 1e-9 + g0.tol);
  CHECK(1.0 / g0.value == doctest::Approx(kCapOrigin).epsilon(1e-9));
  // The one-step identity: G_D(e1) = G_D(0) - 1 (return decomposes through a
  // first step, and all 8 neighbor values are equal by symmetry).
  Bounded g1 = green_d_series(unit(0));
  CHECK(std::abs(g1.value - (g0.value - 1.0)) < g0.tol + g1.tol + 1e-12);
}

TEST_CASE("quadrature route agrees with the series") {
  for (const Point& z : {kOrigin, Point{2, 1, 0, 0}}) {
    QuadResult q = green_d_quadrature(z, 1e-8);
    CHECK(q.converged);
    Bounded s = green_d_series(z);
    CHECK(std::abs(q.value - s.value) < 1e-6 + s.tol);
  }
}

TEST_CASE("table evaluator is certified against the series") {
  GreenTable table;
  double tol = table.green_tol();
  CHECK(tol < 1e-6);
  for (const Point& z :
       {kOrigin, Point{1, 0, 0, 0}, Point{1, 1, 0, 0}, Point{2, 1, 1, 0},
        Point{3, 0, 0, 0}, Point{4, 3, 2, 1}}) {
    Bounded s = green_d_series(z);
    CHECK(std::abs(table.green(z) - s.value) < tol + s.tol);
    Bounded sq = green_sqrt_d_series(z);
    CHECK(std::abs(table.green_sqrt(z) - sq.value) < tol + sq.tol);
  }
  // Symmetry: lookups factor through the orbit representative.
  CHECK(table.green(Point{-2, 1, 0, -1}) == table.green(Point{1, 1, 2, 0}));
}

TEST_CASE("far field decay") {
  GreenTable table;
  for (int d : {15, 25, 40}) {
    Point z{d, 0, 0, 0};
    double far = green_d_far_field(static_cast<double>(z.norm2_sq()));
    CHECK(table.green(z) == doctest::Approx(far).epsilon(0.02));
  }
  // The square root decays like 2 c3 / |z|^3: G_D is 4x the continuum
  // Green function in the far field, and the discrete convolution sum
  // matches the continuum integral at unit lattice spacing, so each
  // square-root factor carries a factor 2.
  Point z{20, 0, 0, 0};
  double expected = 2.0 * kContinuumSqrtConst / 8000.0;
  CHECK(table.green_sqrt(z) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("square root convolves back to the Green function at the origin") {
  GreenTable table;
  int radius = 12;
  table.prefill(radius, true);
  double conv = 0.0, l1 = 0.0;
  Point w;
  for (w[0] = -radius; w[0] <= radius; ++w[0])
    for (w[1] = -radius; w[1] <= radius; ++w[1])
      for (w[2] = -radius; w[2] <= radius; ++w[2])
        for (w[3] = -radius; w[3] <= radius; ++w[3]) {
          double g = table.green_sqrt(w);
          conv += g * g;
          l1 += std::abs(g);
        }
  // Tail: the summand is ~ (2 c3)^2 / |w|^6 outside the box and
  // sum_{|w|>r} |w|^-6 ~ pi^2 / r^2 by the integral comparison (factor 2
  // absorbs lattice slack).
  double c = 2.0 * kContinuumSqrtConst;
  double tail = 2.0 * c * c * M_PI * M_PI / (radius * radius);
  double lookup_err = 2.0 * l1 * table.green_tol();
  CHECK(std::abs(conv - table.green(kOrigin)) < tail + lookup_err);
}

TEST_CASE("table cache round trip") {
  namespace fs = std::filesystem;
  GreenTable table;
  table.prefill(3, true);
  double v = table.green(Point{5, 2, 1, 0});
  fs::path tmp = fs::temp_directory_path() / "rwcap_green_cache.bin";
  table.save(tmp.string());
  GreenTable loaded = GreenTable::load(tmp.string());
  CHECK(loaded.size() == table.size());
  CHECK(loaded.green(Point{5, 2, 1, 0}) == v);
  CHECK(loaded.green(kOrigin) == table.green(kOrigin));
  fs::remove(tmp);
}

TEST_CASE("discrete-continuum comparison holds at moderate scales") {
  for (double n : {64.0, 256.0}) {
    for (const RPoint& z : {RPoint{1.0, 0.0, 0.0, 0.0}, RPoint{0.7, 0.7, 0.0, 0.0},
                            RPoint{1.5, -0.5, 0.5, 0.0}}) {
      DiscContComparison c = compare_disc_cont(z, n);
      CHECK(!c.violation);
      CHECK(std::abs(c.residual) <= c.bound);
    }
  }
}

TEST_CASE("continuum constants") {
  CHECK(kContinuumSqrtConst ==
        doctest::Approx(1.0 / (std::pow(2.0, 1.5) * M_PI * M_PI)).epsilon(1e-15));
  RPoint x{2.0, 0.0, 0.0, 0.0};
  CHECK(continuum_green(x) == doctest::Approx(1.0 / (8.0 * M_PI * M_PI)));
  CHECK(continuum_green_sqrt(x) == doctest::Approx(kContinuumSqrtConst / 8.0));
}

}  // TEST_SUITE
