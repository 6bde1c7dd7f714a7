#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "sidiff/potential.hpp"
#include "sidiff/schedule.hpp"

namespace sidiff {

/// Uniform grid on a box with node values V_a - min V_a, where
/// V_a(x) = V(x) + |x|^2 / a. Nodes sit at integer multiples of h, so the
/// origin is a node whenever the box contains it. Neighbors: 2 in 1D, 8 in 2D.
class GridGraph {
 public:
  GridGraph(const Potential& potential, double a, const SearchBox& box, double h);

  int dimension() const { return dimension_; }
  double spacing() const { return h_; }
  double a() const { return a_; }
  std::size_t size() const { return values_.size(); }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  Vec position(std::size_t node) const;
  /// V_a at the node minus the grid minimum.
  double value(std::size_t node) const { return values_[node]; }
  double min_value() const { return min_value_; }
  std::size_t nearest(const Vec& x) const;
  bool adjacent(std::size_t u, std::size_t v) const;

  template <class F>
  void for_each_neighbor(std::size_t node, F&& f) const {
    const std::size_t i = node % nx_;
    const std::size_t j = node / nx_;
    for (int dj = -1; dj <= 1; ++dj) {
      if ((dj < 0 && j == 0) || (dj > 0 && j + 1 >= ny_)) continue;
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        if ((di < 0 && i == 0) || (di > 0 && i + 1 >= nx_)) continue;
        f((j + dj) * nx_ + (i + di));
      }
    }
  }

  /// Nodes at the grid minimum (within 1e-9) that are also grid local minima.
  std::vector<std::size_t> global_min_nodes() const;

 private:
  int dimension_;
  double a_;
  double h_;
  long i0_ = 0;
  long j0_ = 0;
  std::size_t nx_ = 1;
  std::size_t ny_ = 1;
  double min_value_ = 0.0;
  std::vector<double> values_;
};

/// Largest node value along a connected node path.
double path_energy(const GridGraph& grid, const std::vector<std::size_t>& path);

/// H(x, .) for every node: the smallest achievable maximum value over grid
/// paths from any source. Best-first sweep settling nodes in increasing
/// bottleneck order.
std::vector<double> bottleneck_heights(const GridGraph& grid, const std::vector<std::size_t>& sources);

/// H(x, z) after snapping both points to their nearest nodes.
double minimax_height(const GridGraph& grid, const Vec& x, const Vec& z);

struct MaximalHeight {
  double m = 0.0;
  double h = 0.0;
  double a = 0.0;
  Vec z0{0.0, 0.0};
  std::size_t global_min_nodes = 0;
  double z0_spread = 0.0;  ///< max - min of m over the choice of z0
  double refined_m = 0.0;  ///< m on the grid with spacing h / 2
  bool refinement_warning = false;  ///< |m - refined_m| > 1% of m
};

/// The search region K: the support of chi enlarged by one unit per side.
SearchBox landscape_region(const Potential& potential);

/// m = max over K of H(x, z0) - V_a(x), with z0 a global-minimum node.
MaximalHeight maximal_height(const Potential& potential, double a, double h);
MaximalHeight maximal_height(const Potential& potential, const Schedule& schedule, double r, double t, double h);

struct LandscapeRow {
  double t = 0.0;
  double m = 0.0;
  double a = 0.0;
  double scaled_gap = 0.0;  ///< |m(t) - m(inf)| * a(t)
};

struct LandscapeReport {
  double m_infinity = 0.0;
  std::vector<LandscapeRow> rows;
  double fitted_C = 0.0;  ///< max scaled gap
  bool bound_stable = false;  ///< max / min scaled gap <= 2 (or all gaps zero)
  bool refinement_warning = false;
};

LandscapeReport landscape_report(const Potential& potential, const Schedule& schedule, double r,
                                 const std::vector<double>& t_grid, double h);

/// CSV t,m_t,a_t,bound_C_over_a.
void write_landscape_csv(std::ostream& out, const LandscapeReport& report);

struct Spectrum {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t nodes = 0;
  double h = 0.0;
  bool lambda1_ok = false;  ///< |lambda1| <= 1e-8 lambda2
};

/// Two smallest eigenvalues of minus the reversible tridiagonal generator
/// with stationary weights pi_i ~ exp(-2 V_a(x_i) / eps^2). The box defaults
/// to the Gibbs truncation box of (eps^2, a). Needs h < eps / 5.
Spectrum generator_spectrum_1d(const Potential& potential, double eps2, double a, double h,
                               std::optional<SearchBox> box = std::nullopt);

/// Symmetric tridiagonal (diag, off) eigenvalue by Sturm bisection: the
/// index-th smallest (0-based), to absolute tolerance `tolerance`.
double tridiagonal_eigenvalue(const std::vector<double>& diag, const std::vector<double>& off,
                              std::size_t index, double tolerance = 1e-12);

/// Number of eigenvalues strictly below x.
std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x);

struct SpectrumRow {
  double eps2 = 0.0;
  double lambda2 = 0.0;
  double eps2_log_lambda2 = 0.0;
};

/// CSV eps2,lambda2,eps2_log_lambda2.
void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumRow>& rows);

}  // namespace sidiff
