#include "sidiff/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sidiff/csv.hpp"
#include "sidiff/error.hpp"
#include "sidiff/quadrature.hpp"

namespace sidiff {

namespace {

constexpr double kTailTolerance = 1e-10;
constexpr double kPanelRefineTolerance = 1e-13;
constexpr std::size_t kMaxPanels1d = 2'000'000;
constexpr std::size_t kMaxNodes2d = 20'000'000;
constexpr std::size_t kCdfPoints = 10'001;

double log_erfc(double z) {
  if (z < 26.0) return std::log(std::erfc(z));
  return -z * z - std::log(z * std::sqrt(std::numbers::pi)) + std::log1p(-0.5 / (z * z));
}

}  // namespace

GibbsMeasure::GibbsMeasure(const Potential& potential, double eps2, double a)
    : potential_(potential), eps2_(eps2), a_(a) {
  if (!(eps2 > 0.0) || !std::isfinite(eps2)) throw DomainError("Gibbs measure needs eps^2 > 0");
  if (!(a > 0.0)) throw DomainError("Gibbs measure needs a > 0 (a = infinity allowed)");

  // Reference level: the lowest V_a seen on a coarse scan, at the known minima
  // and at the unresolved (degenerate) candidates.
  const int dim = potential_.dimension();
  const SearchBox& dbox = potential_.default_box();
  reference_ = confined_value({0.0, 0.0});
  if (dim == 1) {
    for (int i = 0; i <= 2000; ++i)
      reference_ = std::min(reference_, confined_value({dbox.lo[0] + (dbox.hi[0] - dbox.lo[0]) * i / 2000.0, 0.0}));
  } else {
    for (int i = 0; i <= 200; ++i)
      for (int j = 0; j <= 200; ++j)
        reference_ = std::min(reference_, confined_value({dbox.lo[0] + (dbox.hi[0] - dbox.lo[0]) * i / 200.0,
                                                          dbox.lo[1] + (dbox.hi[1] - dbox.lo[1]) * j / 200.0}));
  }
  for (const auto& p : potential_.critical_points().points) reference_ = std::min(reference_, confined_value(p.location));
  for (const auto& u : potential_.critical_points().unresolved) reference_ = std::min(reference_, confined_value(u.last));

  // A first pass sizes the box from a crude normalizer estimate; a second pass
  // runs only if the actual normalizer is smaller than that estimate.
  double z_estimate = 1e-3 * std::pow(std::numbers::pi * eps2_, 0.5 * dim) /
                      (1.0 + potential_.growth().a);
  for (int pass = 0; pass < 2; ++pass) {
    const double log_target = std::log(kTailTolerance) + std::log(z_estimate);
    const double c = potential_.decomposition().convexity;
    const double delta = potential_.decomposition().w_min - reference_;
    const double base = -2.0 * delta / eps2_;
    double half_width = 0.0;
    if (dim == 1) {
      auto log_tail = [&](double l) {
        return base + 0.5 * std::log(std::numbers::pi * eps2_ / c) + log_erfc(l * std::sqrt(c / eps2_));
      };
      double lo = 0.0;
      double hi = 1.0;
      while (log_tail(hi) > log_target) hi *= 2.0;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (log_tail(mid) > log_target ? lo : hi) = mid;
      }
      half_width = hi;
    } else {
      const double excess = base + std::log(std::numbers::pi * eps2_ / c) - log_target;
      half_width = excess > 0.0 ? std::sqrt(excess * eps2_ / c) : 0.0;
    }
    half_width = std::max({half_width, 3.0 * std::sqrt(eps2_ / c), 0.5});
    const Vec& center = potential_.decomposition().w_argmin;
    box_ = dim == 1 ? SearchBox{{center[0] - half_width, 0.0}, {center[0] + half_width, 0.0}}
                    : SearchBox{{center[0] - half_width, center[1] - half_width},
                                {center[0] + half_width, center[1] + half_width}};
    double log_tail_value = 0.0;
    if (dim == 1) {
      log_tail_value = base + 0.5 * std::log(std::numbers::pi * eps2_ / c) +
                       log_erfc(half_width * std::sqrt(c / eps2_));
    } else {
      log_tail_value = base + std::log(std::numbers::pi * eps2_ / c) - c * half_width * half_width / eps2_;
    }

    if (dim == 1) {
      integrate_1d();
    } else {
      integrate_2d();
    }
    tail_bound_ = std::exp(log_tail_value - std::log(reduced_normalizer_));
    if (tail_bound_ < kTailTolerance) break;
    z_estimate = reduced_normalizer_;
  }
  if (!(tail_bound_ < kTailTolerance))
    throw ResolutionError("Gibbs truncation box could not bound the tail mass");
  log_normalizer_ = std::log(reduced_normalizer_) - 2.0 * reference_ / eps2_;
  if (dim == 1) build_cdf();
}

double GibbsMeasure::confined_value(const Vec& x) const {
  const double v = potential_.value(x);
  return std::isinf(a_) ? v : v + norm2(x) / a_;
}

double GibbsMeasure::reduced_log_density(const Vec& x) const {
  return -2.0 * (confined_value(x) - reference_) / eps2_;
}

double GibbsMeasure::density(const Vec& x) const {
  return std::exp(reduced_log_density(x)) / reduced_normalizer_;
}

void GibbsMeasure::integrate_1d() {
  const GaussRule& fine = gauss_legendre(20);
  const GaussRule& coarse = gauss_legendre(10);
  auto f = [&](double x) { return std::exp(reduced_log_density({x, 0.0})); };

  const double lo = box_.lo[0];
  const double hi = box_.hi[0];
  const double max_width = std::sqrt(eps2_) / 10.0;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / max_width));
  if (n > kMaxPanels1d || max_width < 1e-9 * (hi - lo))
    throw ResolutionError("eps^2 too small: the Gibbs density cannot be resolved by quadrature");

  struct Panel {
    double a, b, fine, coarse;
  };
  std::vector<Panel> panels;
  panels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    const double b = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(n);
    panels.push_back({a, b, integrate_panel(fine, f, a, b), integrate_panel(coarse, f, a, b)});
  }
  // Dyadic refinement of panels whose two rules disagree.
  for (int round = 0; round < 30; ++round) {
    CompensatedSum total;
    for (const auto& p : panels) total.add(p.fine);
    const double threshold = kPanelRefineTolerance * total.value();
    std::vector<Panel> next;
    bool split = false;
    for (const auto& p : panels) {
      if (std::abs(p.fine - p.coarse) > threshold && p.b - p.a > 1e-12) {
        const double m = 0.5 * (p.a + p.b);
        next.push_back({p.a, m, integrate_panel(fine, f, p.a, m), integrate_panel(coarse, f, p.a, m)});
        next.push_back({m, p.b, integrate_panel(fine, f, m, p.b), integrate_panel(coarse, f, m, p.b)});
        split = true;
      } else {
        next.push_back(p);
      }
    }
    panels = std::move(next);
    if (!split) break;
    if (panels.size() > kMaxPanels1d) throw ResolutionError("Gibbs quadrature panel count exploded");
  }

  CompensatedSum total;
  CompensatedSum error;
  for (const auto& p : panels) {
    total.add(p.fine);
    error.add(std::abs(p.fine - p.coarse));
  }
  reduced_normalizer_ = total.value();
  if (!(reduced_normalizer_ > 0.0) || !std::isfinite(reduced_normalizer_))
    throw ResolutionError("Gibbs normalizer underflowed or overflowed");
  quadrature_error_ = error.value() / reduced_normalizer_;
  panels_ = panels.size();

  nodes_.clear();
  nodes_.reserve(panels.size() * fine.nodes.size());
  for (const auto& p : panels) {
    const double half = 0.5 * (p.b - p.a);
    const double mid = 0.5 * (p.a + p.b);
    for (std::size_t i = 0; i < fine.nodes.size(); ++i) {
      const double x = mid + half * fine.nodes[i];
      nodes_.push_back({{x, 0.0}, half * fine.weights[i] * f(x) / reduced_normalizer_});
    }
  }
}

void GibbsMeasure::integrate_2d() {
  const GaussRule& fine = gauss_legendre(10);
  const GaussRule& coarse = gauss_legendre(7);
  const double max_width = std::sqrt(eps2_) / 4.0;
  const auto n = static_cast<std::size_t>(std::ceil((box_.hi[0] - box_.lo[0]) / max_width));
  if (n * n * fine.nodes.size() * fine.nodes.size() > kMaxNodes2d)
    throw ResolutionError("eps^2 too small for the 2D tensor quadrature");

  auto edge = [&](int axis, std::size_t i) {
    return box_.lo[axis] + (box_.hi[axis] - box_.lo[axis]) * static_cast<double>(i) / static_cast<double>(n);
  };
  auto cell = [&](const GaussRule& rule, double ax, double bx, double ay, double by, bool keep) {
    const double hx = 0.5 * (bx - ax);
    const double hy = 0.5 * (by - ay);
    const double mx = 0.5 * (ax + bx);
    const double my = 0.5 * (ay + by);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const Vec x{mx + hx * rule.nodes[i], my + hy * rule.nodes[j]};
        const double w = hx * hy * rule.weights[i] * rule.weights[j] * std::exp(reduced_log_density(x));
        s += w;
        if (keep) nodes_.push_back({x, w});
      }
    return s;
  };

  nodes_.clear();
  CompensatedSum total;
  CompensatedSum error;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double ax = edge(0, i), bx = edge(0, i + 1), ay = edge(1, j), by = edge(1, j + 1);
      const double hi = cell(fine, ax, bx, ay, by, true);
      const double lo = cell(coarse, ax, bx, ay, by, false);
      total.add(hi);
      error.add(std::abs(hi - lo));
    }
  reduced_normalizer_ = total.value();
  if (!(reduced_normalizer_ > 0.0) || !std::isfinite(reduced_normalizer_))
    throw ResolutionError("Gibbs normalizer underflowed or overflowed");
  quadrature_error_ = error.value() / reduced_normalizer_;
  panels_ = n * n;
  for (auto& node : nodes_) node.weight /= reduced_normalizer_;
}

void GibbsMeasure::build_cdf() {
  const GaussRule& rule = gauss_legendre(20);
  auto f = [&](double x) { return std::exp(reduced_log_density({x, 0.0})); };
  const double lo = box_.lo[0];
  const double hi = box_.hi[0];
  cdf_x_.resize(kCdfPoints);
  cdf_.resize(kCdfPoints);
  for (std::size_t i = 0; i < kCdfPoints; ++i)
    cdf_x_[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kCdfPoints - 1);
  CompensatedSum running;
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i < kCdfPoints; ++i) {
    // Segments can be wider than eps/10 for hot measures; split them to match.
    const double a = cdf_x_[i - 1];
    const double b = cdf_x_[i];
    const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / (std::sqrt(eps2_) / 10.0)));
    for (std::size_t k = 0; k < pieces; ++k)
      running.add(integrate_panel(rule, f, a + (b - a) * k / pieces, a + (b - a) * (k + 1) / pieces));
    cdf_[i] = running.value();
  }
  const double last = cdf_.back();
  for (auto& v : cdf_) v /= last;
  cdf_.back() = 1.0;
}

double GibbsMeasure::expect(const std::function<double(const Vec&)>& f) const {
  CompensatedSum s;
  for (const auto& node : nodes_) s.add(node.weight * f(node.x));
  return s.value();
}

Vec GibbsMeasure::mean() const {
  CompensatedSum s0;
  CompensatedSum s1;
  for (const auto& node : nodes_) {
    s0.add(node.weight * node.x[0]);
    s1.add(node.weight * node.x[1]);
  }
  return {s0.value(), s1.value()};
}

double GibbsMeasure::second_moment() const {
  CompensatedSum s;
  for (const auto& node : nodes_) s.add(node.weight * norm2(node.x));
  return s.value();
}

double GibbsMeasure::mass(double lo, double hi) const {
  if (dimension() != 1) throw UnsupportedError("interval mass is defined for 1D measures");
  lo = std::max(lo, box_.lo[0]);
  hi = std::min(hi, box_.hi[0]);
  if (!(hi > lo)) return 0.0;
  const GaussRule& rule = gauss_legendre(20);
  auto f = [&](double x) { return std::exp(reduced_log_density({x, 0.0})); };
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / (std::sqrt(eps2_) / 10.0)));
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i)
    s.add(integrate_panel(rule, f, lo + (hi - lo) * i / n, i + 1 == n ? hi : lo + (hi - lo) * (i + 1) / n));
  return s.value() / reduced_normalizer_;
}

const std::vector<double>& GibbsMeasure::cdf_x() const {
  if (dimension() != 1) throw UnsupportedError("CDF table is defined for 1D measures");
  return cdf_x_;
}

const std::vector<double>& GibbsMeasure::cdf_values() const {
  if (dimension() != 1) throw UnsupportedError("CDF table is defined for 1D measures");
  return cdf_;
}

double GibbsMeasure::cdf(double x) const {
  const auto& xs = cdf_x();
  if (x <= xs.front()) return 0.0;
  if (x >= xs.back()) return 1.0;
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto i = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return cdf_[i - 1] + w * (cdf_[i] - cdf_[i - 1]);
}

double GibbsMeasure::quantile(double p) const {
  const auto& xs = cdf_x();
  if (p <= 0.0) return xs.front();
  if (p >= 1.0) return xs.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), p);
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  const double span = cdf_[i] - cdf_[i - 1];
  if (span <= 0.0) return xs[i - 1];
  return xs[i - 1] + (p - cdf_[i - 1]) / span * (xs[i] - xs[i - 1]);
}

void GibbsMeasure::write_table_csv(std::ostream& out) const {
  const auto& xs = cdf_x();
  CsvWriter csv(out, {"x", "density", "cdf"});
  for (std::size_t i = 0; i < xs.size(); ++i) csv.row({xs[i], density({xs[i], 0.0}), cdf_[i]});
}

double partition_function(const GibbsMeasure& measure) { return measure.normalizer(); }

namespace {

std::vector<CriticalPoint> checked_global_minima(const Potential& potential) {
  const auto& set = potential.critical_points();
  auto minima = set.global_minima();
  if (minima.empty()) throw UnsupportedError("no nondegenerate global minimum was found");
  const double vmin = minima.front().value;
  for (const auto& u : set.unresolved)
    if (potential.value(u.last) <= vmin + 1e-9)
      throw UnsupportedError("a global minimum has a singular Hessian (" + u.reason + ")");
  for (const auto& m : minima)
    if (!(m.hessian_det > 0.0) || !(m.min_eigenvalue > 0.0))
      throw UnsupportedError("a global minimum has a singular Hessian");
  return minima;
}

}  // namespace

LaplaceApprox laplace_approx(const Potential& potential, double eps2) {
  if (!(eps2 > 0.0)) throw DomainError("laplace_approx needs eps^2 > 0");
  const auto minima = checked_global_minima(potential);
  LaplaceApprox out;
  out.min_value = minima.front().value;
  for (const auto& m : minima) out.min_value = std::min(out.min_value, m.value);
  const double prefactor = std::pow(std::numbers::pi * eps2, 0.5 * potential.dimension());
  for (const auto& m : minima) out.value += prefactor / std::sqrt(m.hessian_det);
  out.log_factor = -2.0 * out.min_value / eps2;
  return out;
}

DiscreteLimitMeasure pi0(const Potential& potential) {
  const auto minima = checked_global_minima(potential);
  DiscreteLimitMeasure out;
  double total = 0.0;
  for (const auto& m : minima) {
    out.support.push_back(m.location);
    out.weights.push_back(1.0 / std::sqrt(m.hessian_det));
    total += out.weights.back();
  }
  for (auto& w : out.weights) w /= total;
  return out;
}

GammaStats gamma_stats(const Potential& potential) {
  if (potential.dimension() != 1) throw UnsupportedError("gamma_stats is defined for 1D potentials");
  const GibbsMeasure gamma(potential, 1.0);
  return {gamma.normalizer(), gamma.mean()[0], gamma.second_moment()};
}

std::vector<double> gibbs_sample(const GibbsMeasure& measure, RngStream& rng, std::size_t n) {
  if (measure.dimension() != 1) throw UnsupportedError("gibbs_sample is defined for 1D measures");
  std::vector<double> out(n);
  for (auto& x : out) x = measure.quantile(rng.uniform());
  return out;
}

SecondMomentReport second_moment_bound_check(const Potential& potential, const Schedule& schedule,
                                             double r, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw DomainError("second_moment_bound_check: empty t grid");
  SecondMomentReport report;
  for (double t : t_grid) {
    const AnnealingState state = annealing_state(schedule, r, t);
    const GibbsMeasure measure(potential, state.eps2, state.a);
    report.t.push_back(t);
    report.eps2.push_back(state.eps2);
    report.second_moment.push_back(measure.second_moment());
  }
  report.max_value = *std::max_element(report.second_moment.begin(), report.second_moment.end());
  report.no_growth = report.second_moment.back() <= 1.1 * report.second_moment.front();
  return report;
}

double smooth_bump(const Vec& x, const Vec& center, double radius) {
  const double d = norm(x - center);
  const double inner = 0.5 * radius;
  if (d <= inner) return 1.0;
  if (d >= radius) return 0.0;
  const double s = (d - inner) / (radius - inner);
  auto psi = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  return psi(1.0 - s) / (psi(1.0 - s) + psi(s));
}

}  // namespace sidiff
