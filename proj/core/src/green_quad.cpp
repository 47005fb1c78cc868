#include <cmath>
#include <numbers>
#include <vector>

#include "rwcap/green.hpp"

namespace rwcap {

namespace {
constexpr double kPi = std::numbers::pi;

/// k4 = int_0^inf erf(w)^4 w^-3 dw, the constant in the exact cube integral
/// int_{[-s,s]^4} |l|^-2 dl = 2 pi^2 k4 s^2.
double erf4_constant() {
  static const double value = [] {
    const double W = 8.0;
    const int n = 4000;
    double h = W / n, acc = 0.0;
    for (int i = 1; i <= n; ++i) {
      double w = h * i;
      double f = std::pow(std::erf(w), 4) / (w * w * w);
      acc += (i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
    }
    // i = 0 endpoint: integrand -> (16/pi^2) w, value 0.
    return acc * h / 3.0 + 1.0 / (2.0 * W * W);
  }();
  return value;
}

struct AxisTables {
  std::vector<double> cosz[4];  // cos(2 pi l z_i)
  std::vector<double> sin2;     // sin^2(pi l)
  std::vector<double> l2;       // l^2
};

AxisTables make_tables(const Point& z, double s, int m) {
  AxisTables t;
  double h = s / m;
  t.sin2.resize(static_cast<size_t>(m));
  t.l2.resize(static_cast<size_t>(m));
  for (int a = 0; a < 4; ++a) t.cosz[a].resize(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    double l = (i + 0.5) * h;
    double sp = std::sin(kPi * l);
    t.sin2[static_cast<size_t>(i)] = sp * sp;
    t.l2[static_cast<size_t>(i)] = l * l;
    for (int a = 0; a < 4; ++a)
      t.cosz[a][static_cast<size_t>(i)] = std::cos(2.0 * kPi * l * z[a]);
  }
  return t;
}

/// Midpoint sum of cos-product/D over the positive-orthant shell
/// [0,s]^4 \ [0,s/2]^4 (skip = true) or the full box [0,s]^4 with the
/// 2/(pi^2 |l|^2) singularity subtracted (skip = false).
double orthant_sum(const AxisTables& t, int m, bool skip_inner, bool subtract) {
  const int half = m / 2;
  const double c_sub = 2.0 / (kPi * kPi);
  double total = 0.0;
  for (int i0 = 0; i0 < m; ++i0) {
    double n0 = t.cosz[0][static_cast<size_t>(i0)];
    double d0 = t.sin2[static_cast<size_t>(i0)];
    double r0 = t.l2[static_cast<size_t>(i0)];
    bool in0 = i0 < half;
    for (int i1 = 0; i1 < m; ++i1) {
      double n1 = n0 * t.cosz[1][static_cast<size_t>(i1)];
      double d1 = d0 + t.sin2[static_cast<size_t>(i1)];
      double r1 = r0 + t.l2[static_cast<size_t>(i1)];
      bool in1 = in0 && i1 < half;
      for (int i2 = 0; i2 < m; ++i2) {
        double n2 = n1 * t.cosz[2][static_cast<size_t>(i2)];
        double d2 = d1 + t.sin2[static_cast<size_t>(i2)];
        double r2 = r1 + t.l2[static_cast<size_t>(i2)];
        int start = (skip_inner && in1 && i2 < half) ? half : 0;
        double row = 0.0;
        if (subtract) {
          for (int i3 = start; i3 < m; ++i3) {
            row += n2 * t.cosz[3][static_cast<size_t>(i3)] /
                       (0.5 * (d2 + t.sin2[static_cast<size_t>(i3)])) -
                   c_sub / (r2 + t.l2[static_cast<size_t>(i3)]);
          }
        } else {
          for (int i3 = start; i3 < m; ++i3) {
            row += n2 * t.cosz[3][static_cast<size_t>(i3)] /
                   (0.5 * (d2 + t.sin2[static_cast<size_t>(i3)]));
          }
        }
        total += row;
      }
    }
  }
  return total;
}

double quad_value(const Point& z, int m) {
  const int levels = 4;  // dyadic shells 1/2, 1/4, 1/8, 1/16 and a core 1/32
  double total = 0.0;
  double s = 0.5;
  for (int j = 0; j < levels; ++j) {
    AxisTables t = make_tables(z, s, m);
    double h = s / m;
    total += orthant_sum(t, m, /*skip_inner=*/true, /*subtract=*/false) * h * h * h * h;
    s *= 0.5;
  }
  AxisTables t = make_tables(z, s, m);
  double h = s / m;
  total += orthant_sum(t, m, /*skip_inner=*/false, /*subtract=*/true) * h * h * h * h;
  return 16.0 * total + 4.0 * erf4_constant() * s * s;
}

}  // namespace

QuadResult green_d_quadrature(const Point& z, double quad_tol, int max_points_per_dim) {
  QuadResult out;
  std::vector<double> prev;  // previous Romberg row (error expansion in h^2)
  double prev_final = 0.0;
  for (int m = 20; m <= max_points_per_dim; m *= 2) {
    std::vector<double> cur{quad_value(z, m)};
    for (size_t k = 1; k <= prev.size(); ++k) {
      double fac = std::pow(4.0, static_cast<double>(k));
      cur.push_back(cur[k - 1] + (cur[k - 1] - prev[k - 1]) / (fac - 1.0));
    }
    double final_v = cur.back();
    ++out.levels;
    out.value = final_v;
    if (out.levels > 1) {
      out.last_diff = std::abs(final_v - prev_final);
      if (out.last_diff < quad_tol) {
        out.converged = true;
        return out;
      }
    }
    prev_final = final_v;
    prev = std::move(cur);
  }
  return out;
}

}  // namespace rwcap
