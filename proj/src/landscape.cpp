#include "sidiff/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "sidiff/csv.hpp"
#include "sidiff/error.hpp"
#include "sidiff/gibbs.hpp"

namespace sidiff {

namespace {

constexpr std::size_t kMaxNodes = 10'000'000;
constexpr double kGlobalMinTolerance = 1e-9;
constexpr double kRefinementTolerance = 0.01;

double confined(const Potential& potential, double a, const Vec& x) {
  const double v = potential.value(x);
  return std::isinf(a) ? v : v + norm2(x) / a;
}

}  // namespace

GridGraph::GridGraph(const Potential& potential, double a, const SearchBox& box, double h)
    : dimension_(potential.dimension()), a_(a), h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid spacing must be positive");
  if (!(a > 0.0)) throw DomainError("grid needs a > 0 (a = infinity allowed)");
  auto axis = [&](double lo, double hi, long& first, std::size_t& count) {
    first = static_cast<long>(std::ceil(lo / h - 1e-9));
    const long last = static_cast<long>(std::floor(hi / h + 1e-9));
    if (last < first) throw DomainError("grid box holds no nodes");
    count = static_cast<std::size_t>(last - first + 1);
  };
  axis(box.lo[0], box.hi[0], i0_, nx_);
  if (dimension_ == 2) axis(box.lo[1], box.hi[1], j0_, ny_);
  if (nx_ * ny_ >= kMaxNodes) throw ResolutionError("grid would exceed 10^7 nodes");
  values_.resize(nx_ * ny_);
  min_value_ = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < values_.size(); ++n) {
    values_[n] = confined(potential, a, position(n));
    min_value_ = std::min(min_value_, values_[n]);
  }
  for (double& v : values_) v -= min_value_;
}

Vec GridGraph::position(std::size_t node) const {
  const auto i = static_cast<long>(node % nx_) + i0_;
  if (dimension_ == 1) return {static_cast<double>(i) * h_, 0.0};
  const auto j = static_cast<long>(node / nx_) + j0_;
  return {static_cast<double>(i) * h_, static_cast<double>(j) * h_};
}

std::size_t GridGraph::nearest(const Vec& x) const {
  auto snap = [&](double c, long first, std::size_t count) {
    const long k = std::lround(c / h_) - first;
    return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(count) - 1));
  };
  const std::size_t i = snap(x[0], i0_, nx_);
  const std::size_t j = dimension_ == 2 ? snap(x[1], j0_, ny_) : 0;
  return j * nx_ + i;
}

bool GridGraph::adjacent(std::size_t u, std::size_t v) const {
  const auto di = std::labs(static_cast<long>(u % nx_) - static_cast<long>(v % nx_));
  const auto dj = std::labs(static_cast<long>(u / nx_) - static_cast<long>(v / nx_));
  return u != v && di <= 1 && dj <= 1;
}

std::vector<std::size_t> GridGraph::global_min_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < values_.size(); ++n) {
    if (values_[n] > kGlobalMinTolerance) continue;
    bool local = true;
    for_each_neighbor(n, [&](std::size_t m) { local = local && values_[m] >= values_[n]; });
    if (local) out.push_back(n);
  }
  return out;
}

double path_energy(const GridGraph& grid, const std::vector<std::size_t>& path) {
  if (path.empty()) throw DomainError("path energy needs a nonempty path");
  double e = grid.value(path.front());
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (!grid.adjacent(path[i - 1], path[i])) throw DomainError("path is not connected on the grid");
    e = std::max(e, grid.value(path[i]));
  }
  return e;
}

std::vector<double> bottleneck_heights(const GridGraph& grid, const std::vector<std::size_t>& sources) {
  std::vector<double> height(grid.size(), std::numeric_limits<double>::infinity());
  std::vector<char> settled(grid.size(), 0);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t s : sources) {
    height[s] = grid.value(s);
    queue.emplace(height[s], s);
  }
  while (!queue.empty()) {
    const auto [h, u] = queue.top();
    queue.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    grid.for_each_neighbor(u, [&](std::size_t v) {
      const double candidate = std::max(h, grid.value(v));
      if (candidate < height[v]) {
        height[v] = candidate;
        queue.emplace(candidate, v);
      }
    });
  }
  return height;
}

double minimax_height(const GridGraph& grid, const Vec& x, const Vec& z) {
  const std::size_t target = grid.nearest(z);
  const double h = bottleneck_heights(grid, {grid.nearest(x)})[target];
  if (!std::isfinite(h)) throw Error("grid nodes are disconnected");
  return h;
}

SearchBox landscape_region(const Potential& potential) {
  const double R = potential.decomposition().support_radius + 1.0;
  if (potential.dimension() == 1) return {{-R, 0.0}, {R, 0.0}};
  return {{-R, -R}, {R, R}};
}

namespace {

struct GridHeight {
  double m = 0.0;
  Vec z0{0.0, 0.0};
  std::size_t global_min_nodes = 0;
  double spread = 0.0;
};

GridHeight grid_height(const Potential& potential, double a, double h) {
  const GridGraph grid(potential, a, landscape_region(potential), h);
  const auto minima = grid.global_min_nodes();
  if (minima.empty()) throw ResolutionError("grid has no global-minimum node");
  GridHeight out;
  out.global_min_nodes = minima.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < minima.size(); ++k) {
    const auto height = bottleneck_heights(grid, {minima[k]});
    double m = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) m = std::max(m, height[n] - grid.value(n));
    if (k == 0) {
      out.m = m;
      out.z0 = grid.position(minima[k]);
    }
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  out.spread = hi - lo;
  return out;
}

}  // namespace

MaximalHeight maximal_height(const Potential& potential, double a, double h) {
  const GridHeight coarse = grid_height(potential, a, h);
  const GridHeight fine = grid_height(potential, a, h / 2.0);
  MaximalHeight out;
  out.m = coarse.m;
  out.h = h;
  out.a = a;
  out.z0 = coarse.z0;
  out.global_min_nodes = coarse.global_min_nodes;
  out.z0_spread = coarse.spread;
  out.refined_m = fine.m;
  out.refinement_warning = std::abs(coarse.m - fine.m) > kRefinementTolerance * std::abs(coarse.m);
  return out;
}

MaximalHeight maximal_height(const Potential& potential, const Schedule& schedule, double r, double t, double h) {
  return maximal_height(potential, annealing_state(schedule, r, t).a, h);
}

LandscapeReport landscape_report(const Potential& potential, const Schedule& schedule, double r,
                                 const std::vector<double>& t_grid, double h) {
  LandscapeReport report;
  const MaximalHeight limit = maximal_height(potential, kInfiniteA, h);
  report.m_infinity = limit.m;
  report.refinement_warning = limit.refinement_warning;
  double lo = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const MaximalHeight mh = maximal_height(potential, schedule, r, t, h);
    LandscapeRow row{t, mh.m, mh.a, std::abs(mh.m - report.m_infinity) * mh.a};
    report.rows.push_back(row);
    report.fitted_C = std::max(report.fitted_C, row.scaled_gap);
    lo = std::min(lo, row.scaled_gap);
    report.refinement_warning = report.refinement_warning || mh.refinement_warning;
  }
  report.bound_stable = report.fitted_C == 0.0 || (lo > 0.0 && report.fitted_C / lo <= 2.0);
  return report;
}

void write_landscape_csv(std::ostream& out, const LandscapeReport& report) {
  CsvWriter csv(out, {"t", "m_t", "a_t", "bound_C_over_a"});
  for (const auto& row : report.rows) csv.row({row.t, row.m, row.a, report.fitted_C / row.a});
}

std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
  double max_off2 = 1.0;
  for (double e : off) max_off2 = std::max(max_off2, e * e);
  const double pivmin = std::numeric_limits<double>::min() * max_off2;
  std::size_t count = 0;
  double q = diag[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    if (i + 1 == diag.size()) break;
    q = diag[i + 1] - x - off[i] * off[i] / q;
  }
  return count;
}

double tridiagonal_eigenvalue(const std::vector<double>& diag, const std::vector<double>& off,
                              std::size_t index, double tolerance) {
  if (diag.empty() || off.size() + 1 != diag.size()) throw DomainError("tridiagonal needs n diagonal and n-1 off entries");
  if (index >= diag.size()) throw DomainError("eigenvalue index out of range");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double radius = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i < off.size() ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - radius);
    hi = std::max(hi, diag[i] + radius);
  }
  lo -= tolerance;
  hi += tolerance;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (sturm_count(diag, off, mid) > index ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

Spectrum generator_spectrum_1d(const Potential& potential, double eps2, double a, double h,
                               std::optional<SearchBox> box) {
  if (potential.dimension() != 1) throw UnsupportedError("generator spectrum is implemented for d = 1");
  if (!(eps2 > 0.0)) throw DomainError("spectrum needs eps^2 > 0");
  if (!(h < std::sqrt(eps2) / 5.0)) throw ResolutionError("spectrum grid must satisfy h < eps / 5");
  const SearchBox region = box ? *box : GibbsMeasure(potential, eps2, a).box();
  const GridGraph grid(potential, a, region, h);
  const std::size_t n = grid.size();
  if (n < 3) throw ResolutionError("spectrum grid needs at least 3 nodes");

  // Symmetrized minus-generator: off-diagonals are the constant eps^2/(2h^2)
  // and the diagonal is the row sum of the unsymmetrized rates.
  const double scale = eps2 / (2.0 * h * h);
  std::vector<double> diag(n, 0.0);
  std::vector<double> off(n - 1, -scale);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dv = (grid.value(i + 1) - grid.value(i)) / eps2;
    const double up = std::exp(-dv);
    const double down = std::exp(dv);
    if (!std::isfinite(up) || !std::isfinite(down) || up == 0.0 || down == 0.0)
      throw ResolutionError("stationary weights under/overflow between neighbors");
    diag[i] += scale * up;
    diag[i + 1] += scale * down;
  }
  Spectrum s;
  s.nodes = n;
  s.h = h;
  s.lambda1 = tridiagonal_eigenvalue(diag, off, 0);
  s.lambda2 = tridiagonal_eigenvalue(diag, off, 1);
  s.lambda1_ok = std::abs(s.lambda1) <= 1e-8 * s.lambda2;
  return s;
}

void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumRow>& rows) {
  CsvWriter csv(out, {"eps2", "lambda2", "eps2_log_lambda2"});
  for (const auto& r : rows) csv.row({r.eps2, r.lambda2, r.eps2_log_lambda2});
}

}  // namespace sidiff
