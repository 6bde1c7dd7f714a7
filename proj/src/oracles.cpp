#include "sidiff/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "sidiff/error.hpp"
#include "sidiff/gibbs.hpp"

namespace sidiff {

double trapezoid_integral(const Potential& potential, double eps2, double a, double lo, double hi, std::size_t n,
                          int moment, double shift) {
  if (potential.dimension() != 1 || n < 1) throw DomainError("trapezoid oracle is 1D with n >= 1");
  const double h = (hi - lo) / static_cast<double>(n);
  long double sum = 0.0L;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = lo + h * static_cast<double>(i);
    double v = potential.value({x, 0.0}) - shift;
    if (!std::isinf(a)) v += x * x / a;
    const double f = moment == 0 ? 1.0 : moment == 1 ? x : x * x;
    const long double term = std::exp(-2.0L * v / eps2) * f;
    sum += (i == 0 || i == n) ? 0.5L * term : term;
  }
  return static_cast<double>(sum * h);
}

namespace {

template <class F>
void rk4(F&& f, std::vector<double>& y, double T, std::size_t n) {
  const double h = T / static_cast<double>(n);
  const std::size_t m = y.size();
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    f(t, y, k1);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    f(t + 0.5 * h, tmp, k2);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    f(t + 0.5 * h, tmp, k3);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + h * k3[j];
    f(t + h, tmp, k4);
    for (std::size_t j = 0; j < m; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
}

}  // namespace

double rk4_centered_ode(const Potential& potential, const Schedule& schedule, double r, double y0, double T,
                        std::size_t n) {
  std::vector<double> y{y0};
  rk4([&](double t, const std::vector<double>& s, std::vector<double>& d) {
        d[0] = -schedule.g(t) * potential.gradient({s[0], 0.0})[0] - s[0] / (r + t);
      },
      y, T, n);
  return y[0];
}

double rk4_coupled_gap(const Potential& potential, double r, double y0, double z0, double T, std::size_t n) {
  std::vector<double> y{y0, z0};
  rk4([&](double t, const std::vector<double>& s, std::vector<double>& d) {
        d[0] = -potential.gradient({s[0], 0.0})[0] - s[0] / (r + t);
        d[1] = -potential.gradient({s[1], 0.0})[0];
      },
      y, T, n);
  return y[0] - y[1];
}

std::vector<double> gradient_roots_1d(const Potential& potential, double lo, double hi, std::size_t n) {
  auto g = [&](double x) { return potential.gradient({x, 0.0})[0]; };
  std::vector<double> roots;
  double x0 = lo;
  double g0 = g(x0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x1 = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    const double g1 = g(x1);
    if (g0 == 0.0) {
      roots.push_back(x0);
    } else if (g0 * g1 < 0.0) {
      double a = x0;
      double b = x1;
      double ga = g0;
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double mid = 0.5 * (a + b);
        const double gm = g(mid);
        if (gm == 0.0) {
          a = b = mid;
          break;
        }
        if ((gm < 0.0) == (ga < 0.0)) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

double grid_osc_chi(const Potential& potential, double step) {
  const double R = potential.decomposition().support_radius;
  if (R == 0.0) return 0.0;
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * R / step));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto visit = [&](const Vec& x) {
    const double c = potential.chi_value(x);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  };
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = -R + 2.0 * R * static_cast<double>(i) / static_cast<double>(n);
    if (potential.dimension() == 1) {
      visit({x, 0.0});
    } else {
      for (std::size_t j = 0; j <= n; ++j) visit({x, -R + 2.0 * R * static_cast<double>(j) / static_cast<double>(n)});
    }
  }
  // chi vanishes outside its support, so 0 belongs to its range.
  return std::max(hi, 0.0) - std::min(lo, 0.0);
}

double interval_maximal_height_1d(const Potential& potential) {
  if (potential.dimension() != 1) throw UnsupportedError("interval oracle is 1D");
  const auto& cps = potential.critical_points();
  const auto global = cps.global_minima();
  if (global.empty()) throw UnsupportedError("no global minimum found");
  const double z0 = global.front().location[0];
  double m = 0.0;
  for (const auto& mi : cps.local_minima()) {
    const double a = std::min(mi.location[0], z0);
    const double b = std::max(mi.location[0], z0);
    double barrier = std::max(mi.value, global.front().value);
    for (const auto& p : cps.points)
      if (p.location[0] >= a && p.location[0] <= b) barrier = std::max(barrier, p.value);
    m = std::max(m, barrier - mi.value);
  }
  return m;
}

std::string run_oracles() {
  using nlohmann::ordered_json;
  ordered_json doc;
  const Potential dw = make_potential("double_well");
  const Potential quad = make_potential("quadratic");
  const Potential spline = make_potential("spline_twowell", {{"h_minus", 2.0}, {"h_plus", 8.0}, {"barrier", 1.0}});
  const Potential tilted = make_potential("tilted_well");

  doc["double_well_gradient_roots"] = gradient_roots_1d(dw, -2.5, 2.5, 5001);
  doc["spline_twowell_gradient_roots"] = gradient_roots_1d(spline, -2.5, 2.5, 5001);
  doc["double_well_osc_chi_grid"] = grid_osc_chi(dw, 1e-4);
  doc["spline_twowell_osc_chi_grid"] = grid_osc_chi(spline, 1e-4);

  const Schedule log1 = Schedule::logarithmic(1.0, std::exp(1.0));
  const double G3 = G_by_quadrature(log1, 3.0);
  doc["log_schedule_G_quadrature_at_3"] = G3;
  doc["log_schedule_G_inverse_bisection_roundtrip_3"] = g_inverse_by_bisection(log1, G3, 1e-12);

  // Brute-force trapezoid references (10^6 intervals).
  const std::size_t n = 1'000'000;
  doc["double_well_Z_eps2_0.05_trapezoid"] = trapezoid_integral(dw, 0.05, kInfiniteA, -3.0, 3.0, n);
  const double zg = trapezoid_integral(dw, 1.0, kInfiniteA, -4.0, 4.0, n);
  doc["double_well_gamma_second_moment_trapezoid"] = trapezoid_integral(dw, 1.0, kInfiniteA, -4.0, 4.0, n, 2) / zg;
  const double zt = trapezoid_integral(tilted, 1.0, kInfiniteA, -7.0, 9.0, n);
  doc["tilted_well_gamma_mean_trapezoid"] = trapezoid_integral(tilted, 1.0, kInfiniteA, -7.0, 9.0, n, 1) / zt;

  doc["quadratic_centered_ode_y_at_5"] = rk4_centered_ode(quad, Schedule::constant(1.0), 1.0, 2.0, 5.0, 100000);
  doc["quadratic_coupled_gap_at_5"] = rk4_coupled_gap(quad, 1.0, 2.0, 2.0, 5.0, 100000);
  doc["double_well_interval_maximal_height"] = interval_maximal_height_1d(dw);
  doc["spline_twowell_interval_maximal_height"] = interval_maximal_height_1d(spline);
  return doc.dump(2) + "\n";
}

}  // namespace sidiff
