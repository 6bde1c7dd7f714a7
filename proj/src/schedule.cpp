#include "sidiff/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/lambert_w.hpp>

#include "sidiff/error.hpp"
#include "sidiff/potential.hpp"

namespace sidiff {

Schedule Schedule::constant(double g0) {
  if (!(g0 > 0.0) || !std::isfinite(g0)) throw ConfigError("constant schedule needs g0 > 0");
  return Schedule(Family::constant, 0.0, 0.0, g0);
}

Schedule Schedule::logarithmic(double k, double shift) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("logarithmic schedule needs k > 0");
  if (!(shift >= std::numbers::e) || !std::isfinite(shift))
    throw ConfigError("logarithmic schedule needs shift >= e");
  return Schedule(Family::logarithmic, k, shift, 0.0);
}

double Schedule::g(double t) const {
  if (family_ == Family::constant) return g0_;
  return std::log(shift_ + t) / k_;
}

double Schedule::g_prime(double t) const {
  if (family_ == Family::constant) return 0.0;
  return 1.0 / (k_ * (shift_ + t));
}

double Schedule::G(double t) const {
  if (t < 0.0) throw DomainError("G: negative time");
  if (family_ == Family::constant) return g0_ * t;
  // k G(t) = (s+t)(log(s+t) - 1) - s(log s - 1), written without cancellation.
  return (t * (std::log(shift_) - 1.0) + (shift_ + t) * std::log1p(t / shift_)) / k_;
}

double Schedule::G_inverse(double u, std::optional<double> hint) const {
  if (!(u >= 0.0)) throw DomainError("G^-1: argument must be >= 0");
  if (family_ == Family::constant) return u / g0_;
  if (u == 0.0) return 0.0;

  double v = 0.0;
  if (hint && *hint >= 0.0) {
    v = *hint;
  } else {
    // y (log y - 1) = C with y = s + v; y = e exp(W0(C / e)).
    const double c = k_ * u + shift_ * (std::log(shift_) - 1.0);
    const double w = boost::math::lambert_w0(c / std::numbers::e);
    v = std::max(0.0, std::numbers::e * std::exp(w) - shift_);
  }
  for (int it = 0; it < 50; ++it) {
    const double step = (G(v) - u) / g(v);
    const double next = std::max(0.0, v - step);
    const bool done = std::abs(next - v) <= 1e-15 * std::max(1.0, v);
    v = next;
    if (done) break;
  }
  return v;
}

std::optional<double> Schedule::k_effective() const {
  if (family_ == Family::logarithmic) return k_;
  return std::nullopt;
}

std::string Schedule::describe() const {
  std::ostringstream out;
  if (family_ == Family::constant) {
    out << "constant(g0=" << g0_ << ")";
  } else {
    out << "logarithmic(k=" << k_ << ", shift=" << shift_ << ")";
  }
  return out.str();
}

double g_inverse(const Schedule& schedule, double u) { return schedule.G_inverse(u); }

namespace {

template <class F>
double adaptive_simpson(F f, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double G_by_quadrature(const Schedule& schedule, double t) {
  if (t < 0.0) throw DomainError("G: negative time");
  if (t == 0.0) return 0.0;
  auto f = [&](double s) { return schedule.g(s); };
  // Split geometrically so each piece is smooth on its own scale.
  double total = 0.0;
  double a = 0.0;
  double b = std::min(t, 1.0);
  while (a < t) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += adaptive_simpson(f, a, b, fa, fm, fb, whole, 1e-13, 50);
    a = b;
    b = std::min(t, 2.0 * b);
  }
  return total;
}

double g_inverse_by_bisection(const Schedule& schedule, double u, double tolerance) {
  if (!(u >= 0.0)) throw DomainError("G^-1: argument must be >= 0");
  double lo = 0.0;
  double hi = 1.0;
  while (G_by_quadrature(schedule, hi) < u) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tolerance * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (G_by_quadrature(schedule, mid) >= u ? hi : lo) = mid;
  }
  return hi;
}

AnnealingState annealing_state(const Schedule& schedule, double r, double t,
                               std::optional<double> hint) {
  if (!(r > 0.0)) throw ConfigError("initial weight r must be positive");
  if (!(t >= 0.0)) throw DomainError("annealing_state: t must be >= 0");
  AnnealingState s;
  s.t = t;
  s.r = r;
  s.inner_time = schedule.G_inverse(t, hint);
  const double gg = schedule.g(s.inner_time);
  s.eps2 = 1.0 / gg;
  s.a = (r + s.inner_time) * gg;
  return s;
}

LsiConstant lsi_constant(const AnnealingState& state, double osc_chi, double c) {
  if (!(c > 0.0)) throw DomainError("lsi_constant: c must be positive");
  if (!(osc_chi >= 0.0)) throw DomainError("lsi_constant: osc must be >= 0");
  const double exponent = 2.0 * osc_chi / state.eps2;
  if (exponent > 700.0) return {std::numeric_limits<double>::infinity(), true};
  return {2.0 * std::exp(exponent) / c, false};
}

const char* to_string(ThresholdVerdict verdict) {
  switch (verdict) {
    case ThresholdVerdict::converges_to_global_minima: return "converges_to_global_minima";
    case ThresholdVerdict::may_freeze: return "may_freeze";
    case ThresholdVerdict::constant_g_regime: return "constant_g_regime";
  }
  return "unknown";
}

ThresholdReport threshold_check(const Schedule& schedule, const Potential& potential) {
  ThresholdReport report;
  report.two_osc_chi = 2.0 * osc_chi(potential);
  report.d_over_4 = potential.dimension() / 4.0;
  report.threshold = std::max(report.two_osc_chi, report.d_over_4);
  report.k_effective = schedule.k_effective();
  if (schedule.family() == Schedule::Family::constant) {
    report.verdict = ThresholdVerdict::constant_g_regime;
  } else {
    report.verdict = *report.k_effective > report.threshold ? ThresholdVerdict::converges_to_global_minima
                                                            : ThresholdVerdict::may_freeze;
  }
  return report;
}

}  // namespace sidiff
