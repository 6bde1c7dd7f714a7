#include "sidiff/potential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "sidiff/error.hpp"
#include "sidiff/rng.hpp"

namespace sidiff {

const char* to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::local_min: return "local_min";
    case CriticalKind::local_max: return "local_max";
    case CriticalKind::saddle: return "saddle";
  }
  return "unknown";
}

std::vector<CriticalPoint> CriticalPointSet::local_minima() const {
  std::vector<CriticalPoint> out;
  for (const auto& p : points)
    if (p.kind == CriticalKind::local_min) out.push_back(p);
  return out;
}

std::vector<CriticalPoint> CriticalPointSet::global_minima() const {
  std::vector<CriticalPoint> out;
  for (const auto& p : points)
    if (p.is_global_min) out.push_back(p);
  return out;
}

namespace {

constexpr double kNewtonTolerance = 1e-10;
constexpr int kNewtonMaxIterations = 100;
constexpr double kMergeRadius = 1e-6;
constexpr double kGlobalMinTolerance = 1e-9;
constexpr double kDegenerateEigenvalue = 1e-7;

using Fn1 = std::function<double(double)>;

struct Bridge {
  bool present = false;
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;  // U(lo)
  double slope = 0.0;
};

// Lower convex hull of (x_i, u_i); returns the indices of hull vertices.
std::vector<std::size_t> lower_hull(const std::vector<double>& x, const std::vector<double>& u) {
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (hull.size() >= 2) {
      const auto a = hull[hull.size() - 2];
      const auto b = hull[hull.size() - 1];
      const double cross = (x[b] - x[a]) * (u[i] - u[a]) - (u[b] - u[a]) * (x[i] - x[a]);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  return hull;
}

// Finds the single bitangent of u over [lo, hi]. Throws if u has more than one
// non-convex region.
Bridge find_bitangent(const Fn1& u, const Fn1& du, const Fn1& d2u, double lo, double hi,
                      double step) {
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  std::vector<double> xs(n);
  std::vector<double> us(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    us[i] = u(xs[i]);
  }
  const auto hull = lower_hull(xs, us);

  Bridge bridge;
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const auto a = hull[k];
    const auto b = hull[k + 1];
    if (b - a < 2) continue;
    const double slope = (us[b] - us[a]) / (xs[b] - xs[a]);
    double excess = 0.0;
    for (auto i = a + 1; i < b; ++i)
      excess = std::max(excess, us[i] - (us[a] + slope * (xs[i] - xs[a])));
    if (excess <= 1e-12 * (1.0 + std::abs(us[a]))) continue;
    if (bridge.present)
      throw UnsupportedError("potential has more than one non-convex region");
    bridge = {true, xs[a], xs[b], us[a], slope};
  }
  if (!bridge.present) return bridge;

  // Newton on u'(a) = u'(b), u(b) - u(a) = u'(a)(b - a).
  double a = bridge.lo;
  double b = bridge.hi;
  for (int it = 0; it < 60; ++it) {
    const double f1 = du(a) - du(b);
    const double f2 = u(b) - u(a) - du(a) * (b - a);
    if (std::abs(f1) < 1e-14 && std::abs(f2) < 1e-15) break;
    const double j11 = d2u(a);
    const double j12 = -d2u(b);
    const double j21 = -d2u(a) * (b - a);
    const double j22 = du(b) - du(a);
    const double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-300) break;
    const double da = (f1 * j22 - j12 * f2) / det;
    const double db = (j11 * f2 - j21 * f1) / det;
    a -= da;
    b -= db;
    if (std::abs(da) + std::abs(db) < 1e-15) break;
  }
  if (!(a < b) || std::abs(a - bridge.lo) > 4 * step || std::abs(b - bridge.hi) > 4 * step)
    throw ConvergenceError("bitangent refinement left its grid bracket");
  bridge.lo = a;
  bridge.hi = b;
  bridge.value = u(a);
  bridge.slope = du(a);
  return bridge;
}

template <class F>
double golden_max(F f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 100 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return std::max({fc, fd, f(lo), f(hi)});
}

// sup and inf of f over [lo, hi]: grid scan, then golden-section polish of the
// best bracket.
std::pair<double, double> grid_extrema(const Fn1& f, double lo, double hi, std::size_t cells) {
  double best_max = -std::numeric_limits<double>::infinity();
  double best_min = std::numeric_limits<double>::infinity();
  std::size_t imax = 0;
  std::size_t imin = 0;
  const double h = (hi - lo) / static_cast<double>(cells);
  for (std::size_t i = 0; i <= cells; ++i) {
    const double v = f(lo + h * static_cast<double>(i));
    if (v > best_max) {
      best_max = v;
      imax = i;
    }
    if (v < best_min) {
      best_min = v;
      imin = i;
    }
  }
  auto bracket = [&](std::size_t i) {
    const double a = lo + h * static_cast<double>(i == 0 ? 0 : i - 1);
    const double b = lo + h * static_cast<double>(std::min(i + 1, cells));
    return std::pair{a, b};
  };
  const auto [a1, b1] = bracket(imax);
  best_max = std::max(best_max, golden_max(f, a1, b1));
  const auto [a2, b2] = bracket(imin);
  best_min = std::min(best_min, -golden_max([&](double x) { return -f(x); }, a2, b2));
  return {best_max, best_min};
}

// Monotone bisection for the root of an increasing function.
double increasing_root(const Fn1& f, double lo, double hi) {
  while (f(lo) > 0.0) lo -= (hi - lo);
  while (f(hi) < 0.0) hi += (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Decomposition build_decomposition(const PotentialShape& shape, const SearchBox& box, double c) {
  Decomposition dec;
  dec.convexity = c;
  const int dim = shape.dimension();
  if (dim == 2 && !shape.radial())
    throw UnsupportedError("2D potentials must be radially symmetric for the W + chi split");

  Fn1 v;
  Fn1 dv;
  Fn1 d2v;
  double lo = box.lo[0];
  double hi = box.hi[0];
  if (dim == 1) {
    v = [&shape](double x) { return shape.value({x, 0.0}); };
    dv = [&shape](double x) { return shape.gradient({x, 0.0})[0]; };
    d2v = [&shape](double x) { return shape.hessian({x, 0.0}).xx; };
  } else {
    // Even extension of the radial profile; its envelope is the radial envelope.
    v = [&shape](double r) { return shape.profile(std::abs(r)); };
    dv = [&shape](double r) { return std::copysign(shape.profile_d1(std::abs(r)), r); };
    d2v = [&shape](double r) { return shape.profile_d2(std::abs(r)); };
    const double reach = std::max({std::abs(box.lo[0]), std::abs(box.hi[0]),
                                   std::abs(box.lo[1]), std::abs(box.hi[1])});
    lo = -reach;
    hi = reach;
  }
  const Fn1 u = [&](double x) { return v(x) - 0.5 * c * x * x; };
  const Fn1 du = [&](double x) { return dv(x) - c * x; };
  const Fn1 d2u = [&](double x) { return d2v(x) - c; };

  const double step = std::min(1e-3, (hi - lo) / 4000.0);
  const Bridge bridge = find_bitangent(u, du, d2u, lo, hi, step);

  if (bridge.present) {
    dec.bridge_lo = bridge.lo;
    dec.bridge_hi = bridge.hi;
    dec.line_value = bridge.value;
    dec.line_slope = bridge.slope;
    if (dim == 1) {
      dec.kind = Decomposition::Kind::interval_bridge;
      dec.support_radius = std::max(std::abs(bridge.lo), std::abs(bridge.hi));
      double lip = 0.0;
      const std::size_t cells = 4000;
      for (std::size_t i = 0; i <= cells; ++i) {
        const double x = bridge.lo + (bridge.hi - bridge.lo) * static_cast<double>(i) / cells;
        lip = std::max(lip, std::abs(d2v(x) - c));
      }
      dec.chi_gradient_lipschitz = lip;
    } else {
      dec.kind = Decomposition::Kind::radial_bridge;
      const double s = 0.5 * (bridge.hi - bridge.lo);
      dec.bridge_lo = 0.0;
      dec.bridge_hi = s;
      dec.line_slope = 0.0;
      dec.support_radius = s;
      double lip = std::abs(shape.profile_d2(0.0) - c);
      const std::size_t cells = 4000;
      for (std::size_t i = 1; i <= cells; ++i) {
        const double r = s * static_cast<double>(i) / cells;
        lip = std::max({lip, std::abs(shape.profile_d2(r) - c),
                        std::abs(shape.profile_d1(r) / r - c)});
      }
      dec.chi_gradient_lipschitz = lip;
    }
  }

  // W is convex; its minimiser solves W' = 0.
  if (dim == 1) {
    const Fn1 dw = [&](double x) {
      if (dec.kind == Decomposition::Kind::interval_bridge && x >= dec.bridge_lo &&
          x <= dec.bridge_hi)
        return dec.line_slope + c * x;
      return dv(x);
    };
    const double x = increasing_root(dw, box.lo[0], box.hi[0]);
    dec.w_argmin = {x, 0.0};
  } else {
    dec.w_argmin = {0.0, 0.0};
  }
  return dec;
}

Sym2 scaled_identity(double c, int dim) { return dim == 1 ? Sym2{c, 0.0, 0.0} : Sym2{c, 0.0, c}; }

bool inside_bridge(const Decomposition& dec, const Vec& x, int dim) {
  switch (dec.kind) {
    case Decomposition::Kind::convex: return false;
    case Decomposition::Kind::interval_bridge:
      return dim == 1 && x[0] >= dec.bridge_lo && x[0] <= dec.bridge_hi;
    case Decomposition::Kind::radial_bridge: return norm(x) <= dec.bridge_hi;
  }
  return false;
}

double bridge_value(const Decomposition& dec, const Vec& x) {
  const double c = dec.convexity;
  if (dec.kind == Decomposition::Kind::interval_bridge)
    return dec.line_value + dec.line_slope * (x[0] - dec.bridge_lo) + 0.5 * c * x[0] * x[0];
  return dec.line_value + 0.5 * c * norm2(x);
}

}  // namespace

Potential::Potential(std::string id, ParamMap params, std::shared_ptr<const PotentialShape> shape,
                     SearchBox default_box, double default_step, GrowthConstants growth,
                     double convexity)
    : id_(std::move(id)),
      params_(std::move(params)),
      shape_(std::move(shape)),
      default_box_(default_box),
      default_step_(default_step),
      growth_(growth) {
  if (!(convexity > 0.0)) throw ConfigError("convexity constant c must be positive");
  decomposition_ = build_decomposition(*shape_, default_box_, convexity);
  decomposition_.w_min = w_value(decomposition_.w_argmin);
  critical_points_ = find_critical_points(*this, default_box_, default_step_);
}

double Potential::w_value(const Vec& x) const {
  if (inside_bridge(decomposition_, x, dimension())) return bridge_value(decomposition_, x) + offset_;
  return value(x);
}

Sym2 Potential::w_hessian(const Vec& x) const {
  if (inside_bridge(decomposition_, x, dimension()))
    return scaled_identity(decomposition_.convexity, dimension());
  return hessian(x);
}

double Potential::chi_value(const Vec& x) const {
  if (!inside_bridge(decomposition_, x, dimension())) return 0.0;
  return shape_->value(x) - bridge_value(decomposition_, x);
}

Potential Potential::shifted(double constant) const {
  Potential out = *this;
  out.offset_ += constant;
  out.decomposition_.w_min += constant;
  for (auto& p : out.critical_points_.points) p.value += constant;
  return out;
}

PotentialEval eval_all(const Potential& potential, const Vec& x) {
  if (!all_finite(x)) throw DomainError("eval_all: non-finite point");
  if (potential.dimension() == 1 && x[1] != 0.0)
    throw DomainError("eval_all: 1D potential evaluated at a point with nonzero second coordinate");
  return {potential.value(x), potential.gradient(x), potential.hessian(x)};
}

CriticalPointSet find_critical_points(const Potential& potential, const SearchBox& box,
                                      double grid_step) {
  if (!(grid_step > 0.0)) throw DomainError("find_critical_points: grid step must be positive");
  const int dim = potential.dimension();
  const auto nx = static_cast<std::size_t>(std::floor((box.hi[0] - box.lo[0]) / grid_step)) + 1;
  const std::size_t ny =
      dim == 1 ? 1 : static_cast<std::size_t>(std::floor((box.hi[1] - box.lo[1]) / grid_step)) + 1;
  if (nx < 3 || (dim == 2 && ny < 3)) throw DomainError("find_critical_points: box too small for grid");
  if (nx * ny > 10'000'000) throw DomainError("find_critical_points: grid too large");

  auto node = [&](std::size_t i, std::size_t j) {
    return Vec{box.lo[0] + grid_step * static_cast<double>(i),
               dim == 1 ? 0.0 : box.lo[1] + grid_step * static_cast<double>(j)};
  };
  std::vector<double> gnorm(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) gnorm[j * nx + i] = norm(potential.gradient(node(i, j)));

  // A node is a candidate if |grad V| is locally minimal and small enough to
  // hide a zero within one grid cell.
  std::vector<Vec> candidates;
  for (std::size_t j = (dim == 1 ? 0 : 1); j < (dim == 1 ? 1 : ny - 1); ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double g = gnorm[j * nx + i];
      bool dip = true;
      for (int dj = (dim == 1 ? 0 : -1); dj <= (dim == 1 ? 0 : 1) && dip; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          if (gnorm[(j + dj) * nx + (i + di)] < g) {
            dip = false;
            break;
          }
        }
      const Vec x = node(i, j);
      const Sym2 h = potential.hessian(x);
      const double hscale = std::max({std::abs(h.xx), std::abs(h.xy), std::abs(h.yy)});
      if (dip && g <= 2.0 * grid_step * (hscale + 1.0)) candidates.push_back(x);
    }
  }
  if (dim == 1) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double g0 = potential.gradient(node(i, 0))[0];
      const double g1 = potential.gradient(node(i + 1, 0))[0];
      if ((g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0))
        candidates.push_back(std::abs(g0) <= std::abs(g1) ? node(i, 0) : node(i + 1, 0));
    }
  }

  const double margin = 0.1 * std::max(box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]);
  auto outside = [&](const Vec& x) {
    return x[0] < box.lo[0] - margin || x[0] > box.hi[0] + margin ||
           (dim == 2 && (x[1] < box.lo[1] - margin || x[1] > box.hi[1] + margin));
  };

  CriticalPointSet out;
  for (const Vec& start : candidates) {
    Vec x = start;
    double gn = norm(potential.gradient(x));
    std::string failure;
    int it = 0;
    for (; it < kNewtonMaxIterations && gn >= kNewtonTolerance; ++it) {
      Vec step{};
      if (!solve(potential.hessian(x), potential.gradient(x), dim, step)) {
        failure = "singular Hessian during Newton refinement";
        break;
      }
      double alpha = 1.0;
      Vec trial = x - step;
      double trial_gn = norm(potential.gradient(trial));
      for (int k = 0; k < 40 && !(trial_gn < gn); ++k) {
        alpha *= 0.5;
        trial = x - alpha * step;
        trial_gn = norm(potential.gradient(trial));
      }
      if (!(trial_gn < gn)) {
        failure = "line search stalled";
        break;
      }
      x = trial;
      gn = trial_gn;
      if (outside(x)) {
        failure = "Newton iterate left the search box";
        break;
      }
    }
    if (failure.empty() && gn >= kNewtonTolerance)
      failure = "no convergence in 100 Newton iterations";

    CriticalPoint cp;
    if (failure.empty()) {
      const Sym2 h = potential.hessian(x);
      const Eigen2 ev = eigenvalues(h, dim);
      const double scale = std::max(1.0, std::max(std::abs(ev.min), std::abs(ev.max)));
      if (std::abs(ev.min) < kDegenerateEigenvalue * scale ||
          std::abs(ev.max) < kDegenerateEigenvalue * scale) {
        failure = "degenerate Hessian at the converged point";
      } else {
        cp.location = x;
        cp.value = potential.value(x);
        cp.hessian_det = determinant(h, dim);
        cp.min_eigenvalue = ev.min;
        cp.kind = ev.min > 0.0   ? CriticalKind::local_min
                  : ev.max < 0.0 ? CriticalKind::local_max
                                 : CriticalKind::saddle;
      }
    }

    if (!failure.empty()) {
      const bool duplicate = std::any_of(out.unresolved.begin(), out.unresolved.end(),
                                         [&](const auto& u) { return norm(u.last - x) < kMergeRadius; });
      if (!duplicate) out.unresolved.push_back({start, x, gn, failure});
      continue;
    }
    const bool duplicate = std::any_of(out.points.begin(), out.points.end(), [&](const auto& p) {
      return norm(p.location - cp.location) < kMergeRadius;
    });
    if (!duplicate) out.points.push_back(cp);
  }

  std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) {
    return a.location[0] != b.location[0] ? a.location[0] < b.location[0]
                                          : a.location[1] < b.location[1];
  });
  double vmin = std::numeric_limits<double>::infinity();
  for (const auto& p : out.points)
    if (p.kind == CriticalKind::local_min) vmin = std::min(vmin, p.value);
  for (auto& p : out.points)
    p.is_global_min = p.kind == CriticalKind::local_min && p.value - vmin <= kGlobalMinTolerance;
  return out;
}

double osc_chi(const Potential& potential) {
  const Decomposition& dec = potential.decomposition();
  if (dec.kind == Decomposition::Kind::convex) return 0.0;
  const std::size_t cells = 4000;  // step = width / 4000 <= 1e-3 * support radius
  Fn1 chi;
  double lo = dec.bridge_lo;
  double hi = dec.bridge_hi;
  if (dec.kind == Decomposition::Kind::interval_bridge) {
    chi = [&](double x) { return potential.chi_value({x, 0.0}); };
  } else {
    // chi is radial; scan one ray.
    chi = [&](double r) { return potential.chi_value({r, 0.0}); };
    lo = 0.0;
  }
  auto [sup, inf] = grid_extrema(chi, lo, hi, cells);
  sup = std::max(sup, 0.0);
  inf = std::min(inf, 0.0);
  return sup - inf;
}

HypothesisReport check_hypotheses(const Potential& potential, std::size_t samples_per_annulus,
                                  std::uint64_t seed) {
  HypothesisReport report;
  report.declared = potential.growth();
  const int dim = potential.dimension();
  const double c = potential.decomposition().convexity;
  const double r0 = std::max(1.0, potential.decomposition().support_radius + 1.0);
  RngStream rng(seed, stream_ids::kHypotheses);

  struct Sample {
    double v;
    double lap;
  };
  std::vector<std::vector<Sample>> per_annulus;
  report.laplacian_bound_ok = true;
  report.potential_nonnegative = true;
  report.min_w_eigenvalue = std::numeric_limits<double>::infinity();

  double inner = 0.0;
  double outer = r0;
  for (int k = 0; k < 5; ++k) {
    AnnulusReport ann;
    ann.r_inner = inner;
    ann.r_outer = outer;
    ann.samples = samples_per_annulus;
    ann.min_growth_ratio = std::numeric_limits<double>::infinity();
    ann.max_laplacian_excess = -std::numeric_limits<double>::infinity();
    ann.min_w_eigenvalue = std::numeric_limits<double>::infinity();
    std::vector<Sample> samples;
    for (std::size_t s = 0; s < samples_per_annulus; ++s) {
      Vec x{};
      if (dim == 1) {
        const double r = inner + (outer - inner) * rng.uniform();
        x = {rng.uniform() < 0.5 ? -r : r, 0.0};
      } else {
        const double r = std::sqrt(inner * inner + (outer * outer - inner * inner) * rng.uniform());
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        x = {r * std::cos(theta), r * std::sin(theta)};
      }
      const double v = potential.value(x);
      const Vec g = potential.gradient(x);
      const double lap = trace(potential.hessian(x), dim);
      const double excess = lap - report.declared.a - report.declared.b * v;
      ann.max_laplacian_excess = std::max(ann.max_laplacian_excess, excess);
      if (excess > 1e-9 * (1.0 + std::abs(lap))) report.laplacian_bound_ok = false;
      if (v < -1e-12) report.potential_nonnegative = false;
      if (v > 1e-12) ann.min_growth_ratio = std::min(ann.min_growth_ratio, norm2(g) / v);
      ann.min_w_eigenvalue =
          std::min(ann.min_w_eigenvalue, eigenvalues(potential.w_hessian(x), dim).min);
      samples.push_back({v, lap});
    }
    report.min_w_eigenvalue = std::min(report.min_w_eigenvalue, ann.min_w_eigenvalue);
    report.annuli.push_back(ann);
    per_annulus.push_back(std::move(samples));
    inner = outer;
    outer *= 2.0;
  }
  report.w_convexity_ok = report.min_w_eigenvalue >= c - 1e-9 * (1.0 + c);

  // b from the two outermost annuli, where V dominates; a absorbs the rest.
  double b_fit = 0.0;
  for (std::size_t k = per_annulus.size() - 2; k < per_annulus.size(); ++k)
    for (const auto& s : per_annulus[k])
      if (s.v > 1e-12) b_fit = std::max(b_fit, s.lap / s.v);
  double a_fit = 0.0;
  for (const auto& ann : per_annulus)
    for (const auto& s : ann) a_fit = std::max(a_fit, s.lap - b_fit * s.v);
  report.fitted = {a_fit, b_fit};

  // Compare the annuli beyond the first, which holds the minima.
  bool increasing = true;
  for (std::size_t k = 2; k < report.annuli.size(); ++k)
    if (!(report.annuli[k].min_growth_ratio > report.annuli[k - 1].min_growth_ratio))
      increasing = false;
  const double first = report.annuli[1].min_growth_ratio;
  const double last = report.annuli.back().min_growth_ratio;
  report.growth_ratio_diverges = increasing && last > 4.0 * first;
  report.growth_ratio_borderline = !report.growth_ratio_diverges && last >= 0.5 * first && last > 0.0;
  return report;
}

}  // namespace sidiff
