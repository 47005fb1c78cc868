#include <cmath>
#include <vector>

#include "doctest.h"
#include "rwcap/gn.hpp"
#include "rwcap/green.hpp"
#include "rwcap/rng.hpp"

using namespace rwcap;

namespace {

// Frozen variational constant (pinned; stable to ~3e-5 across grids).
constexpr double kKappa = 0.3387594290;

RadialProfile gaussian_profile(int n = 400) {
  RadialProfile f = RadialProfile::log_grid(n);
  for (size_t i = 0; i + 1 < f.radii.size(); ++i) {
    f.values[i] = std::exp(-f.radii[i] * f.radii[i]);
  }
  return f;
}

}  // namespace

TEST_SUITE("gn") {

TEST_CASE("log grid is valid and resampling interpolates") {
  RadialProfile f = gaussian_profile(300);
  CHECK(f.valid());
  CHECK(f.values.back() == 0.0);
  RadialProfile g = f.resampled(RadialProfile::log_grid(150).radii);
  CHECK(g.valid());
  // Interpolated values stay within the envelope of the function.
  for (size_t i = 0; i + 1 < g.radii.size(); ++i) {
    CHECK(g.values[i] <= 1.0);
    CHECK(g.values[i] >= 0.0);
  }
  CHECK(gn_ratio(g) == doctest::Approx(gn_ratio(f)).epsilon(5e-3));
}

TEST_CASE("mean value kernel matches sphere-averaged Monte Carlo") {
  double r = 1.5, s = 0.7;
  CounterRng rng(13, 0);
  auto sphere = [&](double radius) {
    RPoint x;
    double nrm = 0.0;
    for (int i = 0; i < 4; ++i) {
      // Box-Muller.
      double u = rng.next_double(), v = rng.next_double();
      x[static_cast<size_t>(i)] =
          std::sqrt(-2.0 * std::log(1.0 - u)) * std::cos(2.0 * M_PI * v);
      nrm += x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
    }
    return scaled(x, radius / std::sqrt(nrm));
  };
  int samples = 200000;
  double mean = 0.0, sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    RPoint x = sphere(r), y = sphere(s);
    RPoint d{x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]};
    double g = continuum_green(d);
    mean += g;
    sq += g * g;
  }
  mean /= samples;
  double se = std::sqrt((sq / samples - mean * mean) / samples);
  CHECK(std::abs(mean - mean_value_kernel(r, s)) < 4.0 * se);
  CHECK(mean_value_kernel(r, s) == mean_value_kernel(s, r));
  CHECK(mean_value_kernel(r, s) ==
        doctest::Approx(1.0 / (2.0 * M_PI * M_PI * r * r)));
}

TEST_CASE("Gaussian profile energies have closed forms") {
  RadialProfile f = gaussian_profile(800);
  GNEnergies e = profile_energies(f);
  CHECK(e.l2_sq == doctest::Approx(M_PI * M_PI / 4.0).epsilon(2e-3));
  CHECK(e.grad_sq == doctest::Approx(M_PI * M_PI).epsilon(2e-3));
  CHECK(e.quartic == doctest::Approx(M_PI * M_PI / 32.0).epsilon(2e-3));
  // ratio^4 = (pi^2/32) / ((pi^2/4) pi^2) = 1/(8 pi^2).
  CHECK(gn_ratio(f) ==
        doctest::Approx(std::pow(8.0 * M_PI * M_PI, -0.25)).epsilon(1e-3));
  CHECK(quartic_energy(f) == doctest::Approx(e.quartic));
}

TEST_CASE("ratio is invariant under scaling and dilation") {
  RadialProfile f = gaussian_profile(300);
  double base = gn_ratio(f);
  RadialProfile scaled_f = f;
  for (double& v : scaled_f.values) v *= 17.25;
  CHECK(gn_ratio(scaled_f) == doctest::Approx(base).epsilon(1e-12));
  RadialProfile dilated = f;
  for (double& r : dilated.radii) r *= 3.0;
  CHECK(gn_ratio(dilated) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches finite differences") {
  CounterRng rng(91, 0);
  for (int trial = 0; trial < 20; ++trial) {
    RadialProfile f = RadialProfile::log_grid(120);
    double a = 0.5 + rng.next_double(), b = 0.2 + rng.next_double();
    for (size_t i = 0; i + 1 < f.radii.size(); ++i) {
      double r = f.radii[i];
      f.values[i] = std::exp(-a * r * r) * (1.0 + 0.3 * std::sin(b * r));
    }
    std::vector<double> grad = gn_ratio_gradient(f);
    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    double worst = 0.0;
    for (size_t i = 0; i + 1 < f.values.size(); i += 7) {
      double h = 1e-6;
      RadialProfile up = f, dn = f;
      up.values[i] += h;
      dn.values[i] -= h;
      double fd = (gn_ratio(up) - gn_ratio(dn)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("maximized ratio reproduces the pinned constant") {
  GNConfig cfg;
  GNResult res = maximize_ratio(cfg);
  CHECK(res.converged);
  CHECK(std::abs(res.kappa - kKappa) < 5e-4);
  CHECK(gn_ratio(res.profile) == doctest::Approx(res.kappa).epsilon(1e-8));
  // The maximum beats every battery profile, in particular the Gaussian.
  CHECK(res.kappa > gn_ratio(gaussian_profile()) + 1e-3);
  // Refinement history: coarse and fine stages agree to 1%.
  REQUIRE(res.refinement_history.size() >= 2);
  double coarse = res.refinement_history.front().second;
  double fine = res.refinement_history.back().second;
  CHECK(std::abs(coarse - fine) < 0.01 * fine);
  for (size_t i = 1; i < res.refinement_history.size(); ++i) {
    CHECK(res.refinement_history[i].second >=
          res.refinement_history[i - 1].second - 1e-12);
  }
}

TEST_CASE("dual formulation attains pi^4 kappa^4 / 8") {
  GNConfig cfg;
  GNResult res = maximize_ratio(cfg);
  double expected = std::pow(M_PI, 4.0) * std::pow(res.kappa, 4.0) / 8.0;
  CHECK(dual_form_value(res.profile) == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("derived deviation constants") {
  DeviationConstants d1 = deviation_constants(kKappa, 1.0);
  CHECK(d1.i4 * d1.lil == doctest::Approx(1.0).epsilon(1e-14));
  DeviationConstants d2 = deviation_constants(kKappa, 2.5);
  CHECK(d2.i4 == doctest::Approx(2.5 * d1.i4).epsilon(1e-14));
  CHECK(d2.lil == d1.lil);
  CHECK(deviation_constants(kKappa, 0.0).i4 == 0.0);
  // Explicit forms: I4(lambda) = (2/pi^4) kappa^-4 lambda.
  CHECK(d1.i4 ==
        doctest::Approx(2.0 / std::pow(M_PI, 4.0) / std::pow(kKappa, 4.0)));
}

}  // TEST_SUITE
