#include "rwcap/gn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rwcap/rng.hpp"

namespace rwcap {

namespace {

constexpr double kTwoPiSq = 2.0 * M_PI * M_PI;

// Cell weights w_i = 2 pi^2 r_i^3 dr_i (cells bounded by midpoints, the
// innermost cell extended to 0) and midpoint gradient coefficients
// c_i = 2 pi^2 rmid^3 / (r_{i+1} - r_i).
struct Discretization {
  std::vector<double> w;
  std::vector<double> c;
};

Discretization discretize(const std::vector<double>& r) {
  size_t n = r.size();
  Discretization d;
  d.w.resize(n);
  d.c.resize(n - 1);
  for (size_t i = 0; i < n; ++i) {
    double lo = (i == 0) ? 0.0 : 0.5 * (r[i - 1] + r[i]);
    double hi = (i + 1 == n) ? r[i] : 0.5 * (r[i] + r[i + 1]);
    d.w[i] = kTwoPiSq * r[i] * r[i] * r[i] * (hi - lo);
  }
  for (size_t i = 0; i + 1 < n; ++i) {
    double rm = 0.5 * (r[i] + r[i + 1]);
    d.c[i] = kTwoPiSq * rm * rm * rm / (r[i + 1] - r[i]);
  }
  return d;
}

// kv_i = sum_j K(r_i, r_j) v_j in O(n) via prefix sums: K splits into
// (1/r_i^2) for r_j <= r_i and (1/r_j^2) beyond.
std::vector<double> kernel_apply(const std::vector<double>& r,
                                 const std::vector<double>& v) {
  size_t n = r.size();
  std::vector<double> kv(n);
  std::vector<double> suffix(n + 1, 0.0);
  for (size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + v[i] / (r[i] * r[i]);
  double prefix = 0.0;
  for (size_t i = 0; i < n; ++i) {
    prefix += v[i];
    kv[i] = (prefix / (r[i] * r[i]) + suffix[i + 1]) / kTwoPiSq;
  }
  return kv;
}

struct EnergyParts {
  GNEnergies e;
  std::vector<double> kv;  // kernel applied to v_i = f_i^2 w_i
};

EnergyParts energy_parts(const RadialProfile& f, const Discretization& d) {
  size_t n = f.radii.size();
  EnergyParts p;
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) {
    p.e.l2_sq += f.values[i] * f.values[i] * d.w[i];
    v[i] = f.values[i] * f.values[i] * d.w[i];
  }
  for (size_t i = 0; i + 1 < n; ++i) {
    double df = f.values[i + 1] - f.values[i];
    p.e.grad_sq += d.c[i] * df * df;
  }
  p.kv = kernel_apply(f.radii, v);
  for (size_t i = 0; i < n; ++i) p.e.quartic += v[i] * p.kv[i];
  return p;
}

double ratio_from(const GNEnergies& e) {
  if (e.l2_sq <= 0.0 || e.grad_sq <= 0.0) {
    throw std::invalid_argument("gn_ratio: degenerate profile");
  }
  return std::pow(e.quartic, 0.25) / std::sqrt(std::sqrt(e.l2_sq * e.grad_sq));
}

void check_profile(const RadialProfile& f) {
  if (!f.valid()) throw std::invalid_argument("invalid radial profile");
}

// Thomas solve of the SPD tridiagonal system (diag, off) x = b.
std::vector<double> solve_tridiag(std::vector<double> diag,
                                  const std::vector<double>& off,
                                  std::vector<double> b) {
  size_t m = diag.size();
  for (size_t i = 1; i < m; ++i) {
    double w = off[i - 1] / diag[i - 1];
    diag[i] -= w * off[i - 1];
    b[i] -= w * b[i - 1];
  }
  std::vector<double> x(m);
  x[m - 1] = b[m - 1] / diag[m - 1];
  for (size_t i = m - 1; i-- > 0;) x[i] = (b[i] - off[i] * x[i + 1]) / diag[i];
  return x;
}

// One ascent run from the given start; returns the final ratio.  Each step
// solves the stationarity equation [(2/D)A + (2/L)W] f_new = (4/Q) W (f kv)
// (A = gradient stiffness matrix, W = diag cell weights) -- a damped
// fixed-point iteration whose fixed points are critical points of the
// ratio -- and accepts the largest damping that does not decrease the ratio.
double ascend(RadialProfile& f, const Discretization& d, int max_iters,
              double tol, bool* converged) {
  size_t n = f.radii.size();
  size_t m = n - 1;  // active unknowns; f_{n-1} = 0 is the decay condition
  auto normalize = [&](RadialProfile& g) {
    g.values.back() = 0.0;
    double l2 = 0.0;
    for (size_t i = 0; i < n; ++i) l2 += g.values[i] * g.values[i] * d.w[i];
    double s = 1.0 / std::sqrt(l2);
    for (double& x : g.values) x *= s;
  };
  normalize(f);
  EnergyParts p = energy_parts(f, d);
  double ratio = ratio_from(p.e);
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> diag(m), off(m - 1), b(m);
    double cl = 2.0 / p.e.grad_sq, cw = 2.0 / p.e.l2_sq;
    for (size_t i = 0; i < m; ++i) {
      double aii = d.c[i] + (i > 0 ? d.c[i - 1] : 0.0);
      diag[i] = cl * aii + cw * d.w[i];
      if (i + 1 < m) off[i] = -cl * d.c[i];
      b[i] = 4.0 / p.e.quartic * d.w[i] * f.values[i] * p.kv[i];
    }
    std::vector<double> fn = solve_tridiag(std::move(diag), off, std::move(b));

    double t = 1.0;
    bool accepted = false;
    double new_ratio = ratio;
    RadialProfile trial = f;
    while (t > 1e-10) {
      for (size_t i = 0; i < m; ++i) {
        trial.values[i] = (1.0 - t) * f.values[i] + t * fn[i];
      }
      normalize(trial);
      EnergyParts tp = energy_parts(trial, d);
      double tr = ratio_from(tp.e);
      if (tr >= ratio) {
        f = trial;
        p = std::move(tp);
        new_ratio = tr;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || (new_ratio - ratio) <= tol * std::max(ratio, 1e-300)) {
      if (converged) *converged = true;
      return new_ratio;
    }
    ratio = new_ratio;
  }
  if (converged) *converged = false;
  return ratio;
}

std::vector<RadialProfile> start_battery(const std::vector<double>& r, int starts,
                                         uint64_t seed) {
  std::vector<std::function<double(double)>> shapes = {
      [](double x) { return std::exp(-x); },
      [](double x) { return std::exp(-x * x); },
      [](double x) { return 1.0 / (1.0 + x * x); },
      [](double x) { return 1.0 / ((1.0 + x * x) * (1.0 + x * x)); }};
  std::vector<RadialProfile> out;
  for (int s = 0; s < starts; ++s) {
    RadialProfile f;
    f.radii = r;
    f.values.resize(r.size());
    if (s < static_cast<int>(shapes.size())) {
      for (size_t i = 0; i < r.size(); ++i) f.values[i] = shapes[s % 4](r[i]);
    } else {
      // smooth random modulation of the exponential start
      CounterRng rng(seed, static_cast<uint64_t>(s));
      double a1 = rng.next_double() - 0.5, a2 = rng.next_double() - 0.5;
      double a3 = rng.next_double() - 0.5;
      for (size_t i = 0; i < r.size(); ++i) {
        double x = r[i];
        double mod = 1.0 + 0.4 * a1 * std::sin(x) + 0.4 * a2 * std::cos(2.0 * x) +
                     0.4 * a3 / (1.0 + x);
        f.values[i] = std::exp(-x) * mod;
      }
    }
    f.values.back() = 0.0;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

RadialProfile RadialProfile::log_grid(int n, double r_min, double r_max) {
  if (n < 8 || r_min <= 0.0 || r_max <= r_min) {
    throw std::invalid_argument("log_grid: bad parameters");
  }
  RadialProfile f;
  f.radii.resize(static_cast<size_t>(n));
  f.values.assign(static_cast<size_t>(n), 0.0);
  double lmin = std::log(r_min), lmax = std::log(r_max);
  for (int i = 0; i < n; ++i) {
    f.radii[static_cast<size_t>(i)] =
        std::exp(lmin + (lmax - lmin) * i / static_cast<double>(n - 1));
  }
  return f;
}

bool RadialProfile::valid() const {
  if (radii.size() < 3 || radii.size() != values.size()) return false;
  if (radii.front() <= 0.0) return false;
  for (size_t i = 0; i + 1 < radii.size(); ++i) {
    if (!(radii[i] < radii[i + 1])) return false;
  }
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return values.back() == 0.0;
}

RadialProfile RadialProfile::resampled(const std::vector<double>& new_radii) const {
  RadialProfile g;
  g.radii = new_radii;
  g.values.resize(new_radii.size(), 0.0);
  for (size_t i = 0; i < new_radii.size(); ++i) {
    double r = new_radii[i];
    if (r <= radii.front()) {
      g.values[i] = values.front();  // f'(0) = 0
      continue;
    }
    if (r >= radii.back()) {
      g.values[i] = 0.0;
      continue;
    }
    size_t hi = static_cast<size_t>(
        std::upper_bound(radii.begin(), radii.end(), r) - radii.begin());
    size_t lo = hi - 1;
    double t = (std::log(r) - std::log(radii[lo])) /
               (std::log(radii[hi]) - std::log(radii[lo]));
    g.values[i] = (1.0 - t) * values[lo] + t * values[hi];
  }
  g.values.back() = 0.0;
  return g;
}

double mean_value_kernel(double r, double s) {
  double m = std::max(r, s);
  return 1.0 / (kTwoPiSq * m * m);
}

GNEnergies profile_energies(const RadialProfile& f) {
  check_profile(f);
  return energy_parts(f, discretize(f.radii)).e;
}

double quartic_energy(const RadialProfile& f) { return profile_energies(f).quartic; }

double gn_ratio(const RadialProfile& f) { return ratio_from(profile_energies(f)); }

std::vector<double> gn_ratio_gradient(const RadialProfile& f) {
  check_profile(f);
  Discretization d = discretize(f.radii);
  EnergyParts p = energy_parts(f, d);
  double ratio = ratio_from(p.e);
  size_t n = f.radii.size();
  std::vector<double> g(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double fw = f.values[i] * d.w[i];
    double dd = 0.0;
    if (i > 0) dd += 2.0 * d.c[i - 1] * (f.values[i] - f.values[i - 1]);
    if (i + 1 < n) dd -= 2.0 * d.c[i] * (f.values[i + 1] - f.values[i]);
    g[i] = ratio * (fw * p.kv[i] / p.e.quartic - fw / (2.0 * p.e.l2_sq) -
                    dd / (4.0 * p.e.grad_sq));
  }
  return g;
}

GNResult maximize_ratio(const GNConfig& config) {
  if (config.coarse_grid < 16 || config.fine_grid < config.coarse_grid ||
      config.starts < 1) {
    throw std::invalid_argument("maximize_ratio: bad config");
  }
  GNResult result;
  RadialProfile coarse = RadialProfile::log_grid(config.coarse_grid, config.r_min,
                                                 config.r_max);
  Discretization dc = discretize(coarse.radii);

  RadialProfile best;
  double best_ratio = 0.0;
  bool all_converged = true;
  for (RadialProfile& start :
       start_battery(coarse.radii, config.starts, config.seed)) {
    bool conv = false;
    double r = ascend(start, dc, config.max_iters, config.tol, &conv);
    all_converged = all_converged && conv;
    if (r > best_ratio) {
      best_ratio = r;
      best = start;
    }
  }
  result.refinement_history.emplace_back(config.coarse_grid, best_ratio);

  RadialProfile fine_grid_profile = RadialProfile::log_grid(
      config.fine_grid, config.r_min, config.r_max);
  RadialProfile refined = best.resampled(fine_grid_profile.radii);
  Discretization df = discretize(refined.radii);
  bool conv = false;
  double fine_ratio = ascend(refined, df, config.max_iters, config.tol, &conv);
  all_converged = all_converged && conv;
  if (fine_ratio > best_ratio) {
    best_ratio = fine_ratio;
    best = refined;
  }
  result.refinement_history.emplace_back(config.fine_grid,
                                         std::max(best_ratio, fine_ratio));

  result.kappa = best_ratio;
  result.profile = best;
  result.energies = profile_energies(best);
  result.converged = all_converged;
  return result;
}

DeviationConstants deviation_constants(double kappa, double lambda) {
  if (kappa <= 0.0) throw std::domain_error("deviation_constants: kappa <= 0");
  if (lambda < 0.0) throw std::domain_error("deviation_constants: lambda < 0");
  double k4 = kappa * kappa * kappa * kappa;
  double pi4 = M_PI * M_PI * M_PI * M_PI;
  return {2.0 / pi4 / k4 * lambda, pi4 / 2.0 * k4};
}

double dual_form_value(const RadialProfile& maximizer) {
  check_profile(maximizer);
  GNEnergies e = profile_energies(maximizer);
  if (e.l2_sq <= 0.0 || e.grad_sq <= 0.0) {
    throw std::invalid_argument("dual_form_value: degenerate profile");
  }
  // Unit-norm energies; optimal rescaling lambda* = pi^2 sqrt(Q) / D.
  double q = e.quartic / (e.l2_sq * e.l2_sq);
  double dd = e.grad_sq / e.l2_sq;
  double lambda_star = M_PI * M_PI * std::sqrt(q) / dd;

  double best = 0.0;
  for (int k = -20; k <= 20; ++k) {
    double lam = lambda_star * std::pow(2.0, k / 20.0);
    // f_lam(r) = lam^2 f(lam r) on the same grid (unit L2 preserved in the
    // continuum; renormalize to absorb discretization drift).
    RadialProfile g;
    g.radii = maximizer.radii;
    g.values.resize(g.radii.size());
    for (size_t i = 0; i < g.radii.size(); ++i) {
      double r = g.radii[i] * lam;
      double v;
      if (r <= maximizer.radii.front()) {
        v = maximizer.values.front();
      } else if (r >= maximizer.radii.back()) {
        v = 0.0;
      } else {
        size_t hi = static_cast<size_t>(
            std::upper_bound(maximizer.radii.begin(), maximizer.radii.end(), r) -
            maximizer.radii.begin());
        size_t lo = hi - 1;
        double t = (std::log(r) - std::log(maximizer.radii[lo])) /
                   (std::log(maximizer.radii[hi]) - std::log(maximizer.radii[lo]));
        v = (1.0 - t) * maximizer.values[lo] + t * maximizer.values[hi];
      }
      g.values[i] = lam * lam * v;
    }
    g.values.back() = 0.0;
    GNEnergies ge = profile_energies(g);
    if (ge.l2_sq <= 0.0) continue;
    double qq = ge.quartic / (ge.l2_sq * ge.l2_sq);
    double gg = ge.grad_sq / ge.l2_sq;
    double obj = (M_PI * M_PI / 4.0) * std::sqrt(qq) - gg / 8.0;
    best = std::max(best, obj);
  }
  return best;
}

std::string GNResult::to_json() const {
  nlohmann::json j;
  j["kappa"] = kappa;
  j["converged"] = converged;
  j["energies"] = {{"l2_sq", energies.l2_sq},
                   {"grad_sq", energies.grad_sq},
                   {"quartic", energies.quartic}};
  j["refinement_history"] = nlohmann::json::array();
  for (const auto& [n, k] : refinement_history) {
    j["refinement_history"].push_back({{"grid", n}, {"kappa", k}});
  }
  j["grid_size"] = profile.radii.size();
  return j.dump(2);
}

std::string GNResult::profile_csv() const {
  std::ostringstream os;
  os << "r,f\n";
  os.precision(17);
  for (size_t i = 0; i < profile.radii.size(); ++i) {
    os << profile.radii[i] << "," << profile.values[i] << "\n";
  }
  return os.str();
}

}  // namespace rwcap
