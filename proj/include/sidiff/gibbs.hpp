#pragma once

#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include "sidiff/potential.hpp"
#include "sidiff/rng.hpp"
#include "sidiff/schedule.hpp"

namespace sidiff {

inline constexpr double kInfiniteA = std::numeric_limits<double>::infinity();

/// Probability density proportional to exp(-2 V_a(x) / eps^2) with
/// V_a(x) = V(x) + |x|^2 / a (a = infinity gives V itself).
///
/// The density is integrated over a box chosen from the quadratic minorant of
/// W so that the neglected tail mass is below 1e-10, with composite
/// Gauss-Legendre panels no wider than eps/10 (1D) or eps/4 (2D, tensor rule).
class GibbsMeasure {
 public:
  GibbsMeasure(const Potential& potential, double eps2, double a = kInfiniteA);

  const Potential& potential() const { return potential_; }
  int dimension() const { return potential_.dimension(); }
  double eps2() const { return eps2_; }
  double a() const { return a_; }
  const SearchBox& box() const { return box_; }

  double confined_value(const Vec& x) const;
  double density(const Vec& x) const;

  /// log of Z = int exp(-2 V_a / eps^2); finite even when Z itself is not.
  double log_normalizer() const { return log_normalizer_; }
  double normalizer() const { return std::exp(log_normalizer_); }
  double quadrature_error() const { return quadrature_error_; }
  double tail_bound() const { return tail_bound_; }
  std::size_t panel_count() const { return panels_; }

  /// Expectation of f; sums the cached quadrature nodes in fixed order.
  double expect(const std::function<double(const Vec&)>& f) const;
  Vec mean() const;
  double second_moment() const;  ///< <|x|^2>

  /// Probability of [lo, hi] (1D only), by its own panel integration.
  double mass(double lo, double hi) const;

  /// Tabulated CDF (1D only): 10^4 + 1 equally spaced points across the box.
  const std::vector<double>& cdf_x() const;
  const std::vector<double>& cdf_values() const;
  double cdf(double x) const;
  double quantile(double p) const;

  /// CSV with header x,density,cdf.
  void write_table_csv(std::ostream& out) const;

 private:
  struct Node {
    Vec x;
    double weight;  ///< quadrature weight times normalized density
  };

  double reduced_log_density(const Vec& x) const;
  void build_box();
  void integrate_1d();
  void integrate_2d();
  void build_cdf();

  Potential potential_;
  double eps2_;
  double a_;
  double reference_ = 0.0;  ///< value subtracted from V_a before exponentiation
  SearchBox box_;
  double tail_bound_ = 0.0;
  double log_normalizer_ = 0.0;
  double reduced_normalizer_ = 0.0;
  double quadrature_error_ = 0.0;
  std::size_t panels_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> cdf_x_;
  std::vector<double> cdf_;
};

/// Z of the measure (equivalently GibbsMeasure::normalizer).
double partition_function(const GibbsMeasure& measure);

struct LaplaceApprox {
  double value = 0.0;      ///< sum over global minima of (pi eps^2)^(d/2) det^(-1/2)
  double min_value = 0.0;  ///< min V, reported separately
  double log_factor = 0.0;  ///< -2 min V / eps^2; Z ~ value * exp(log_factor)
};

LaplaceApprox laplace_approx(const Potential& potential, double eps2);

struct DiscreteLimitMeasure {
  std::vector<Vec> support;
  std::vector<double> weights;
};

/// Weights proportional to det(Hess V(m_i))^(-1/2) over the global minima.
DiscreteLimitMeasure pi0(const Potential& potential);

struct GammaStats {
  double normalizer = 0.0;
  double mean = 0.0;
  double second_moment = 0.0;
};

/// Statistics of the density proportional to exp(-2V) (1D).
GammaStats gamma_stats(const Potential& potential);

/// Inverse-CDF draws with linear interpolation in the tabulated CDF (1D).
std::vector<double> gibbs_sample(const GibbsMeasure& measure, RngStream& rng, std::size_t n);

struct SecondMomentReport {
  std::vector<double> t;
  std::vector<double> eps2;
  std::vector<double> second_moment;
  double max_value = 0.0;
  bool no_growth = false;  ///< last <= first * 1.1
};

SecondMomentReport second_moment_bound_check(const Potential& potential, const Schedule& schedule,
                                             double r, const std::vector<double>& t_grid);

/// Smooth bump: 1 on |x - center| <= radius/2, 0 beyond radius, C-infinity taper.
double smooth_bump(const Vec& x, const Vec& center, double radius);

}  // namespace sidiff
