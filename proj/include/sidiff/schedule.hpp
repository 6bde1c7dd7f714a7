#pragma once

#include <optional>
#include <string>

namespace sidiff {

class Potential;

/// The drift-growth function g and its primitive G.
///
/// Logarithmic family: g(t) = log(s + t) / k with shift s >= e, so g(0) = log(s)/k > 0
/// and the temperature behaves like eps^2(t) ~ k / log t. The coefficient k is
/// then the quantity compared against the annealing threshold.
class Schedule {
 public:
  enum class Family { constant, logarithmic };

  static Schedule constant(double g0);
  static Schedule logarithmic(double k, double shift);

  Family family() const { return family_; }
  double k() const { return k_; }
  double shift() const { return shift_; }
  double g0() const { return g0_; }

  double g(double t) const;
  double g_prime(double t) const;
  /// G(t) = int_0^t g, in closed form.
  double G(double t) const;
  /// Generalized inverse of G; closed form (Lambert W for the logarithmic
  /// family) polished by Newton. `hint`, when given, seeds Newton directly.
  double G_inverse(double u, std::optional<double> hint = std::nullopt) const;

  /// lim g(t)^-1 log G(t) when finite (logarithmic family: k).
  std::optional<double> k_effective() const;

  std::string describe() const;

 private:
  Schedule(Family family, double k, double shift, double g0)
      : family_(family), k_(k), shift_(shift), g0_(g0) {}

  Family family_;
  double k_ = 0.0;
  double shift_ = 0.0;
  double g0_ = 0.0;
};

/// G^-1(u) for u >= 0 to absolute tolerance 1e-10.
double g_inverse(const Schedule& schedule, double u);

/// Reference paths that use no closed form: adaptive Simpson for G (absolute
/// tolerance 1e-12) and monotone bisection for G^-1 (relative tolerance).
double G_by_quadrature(const Schedule& schedule, double t);
double g_inverse_by_bisection(const Schedule& schedule, double u, double tolerance = 1e-10);

struct AnnealingState {
  double t = 0.0;
  double eps2 = 0.0;  ///< 1 / g(G^-1(t))
  double a = 0.0;     ///< (r + G^-1(t)) / eps2
  double r = 0.0;
  double inner_time = 0.0;  ///< G^-1(t)
};

AnnealingState annealing_state(const Schedule& schedule, double r, double t,
                               std::optional<double> hint = std::nullopt);

struct LsiConstant {
  double value = 0.0;  ///< +infinity when saturated
  bool saturated = false;
};

/// 2 exp(2 osc / eps^2) / c, saturating once the exponent exceeds 700.
LsiConstant lsi_constant(const AnnealingState& state, double osc_chi, double c);

enum class ThresholdVerdict { converges_to_global_minima, may_freeze, constant_g_regime };

const char* to_string(ThresholdVerdict verdict);

struct ThresholdReport {
  ThresholdVerdict verdict = ThresholdVerdict::constant_g_regime;
  std::optional<double> k_effective;
  double two_osc_chi = 0.0;
  double d_over_4 = 0.0;
  double threshold = 0.0;  ///< max(2 osc, d/4)
};

ThresholdReport threshold_check(const Schedule& schedule, const Potential& potential);

}  // namespace sidiff
