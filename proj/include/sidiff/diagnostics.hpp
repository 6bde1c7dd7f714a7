#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sidiff/gibbs.hpp"
#include "sidiff/potential.hpp"
#include "sidiff/rng.hpp"
#include "sidiff/sde.hpp"

namespace sidiff {

/// Basins of the local minima. In 1D the boundaries are the midpoints between
/// adjacent minima; in 2D a point belongs to the nearest minimum.
class BasinPartition {
 public:
  explicit BasinPartition(std::vector<Vec> minima, int dimension);
  static BasinPartition of(const Potential& potential);

  std::size_t size() const { return minima_.size(); }
  const std::vector<Vec>& minima() const { return minima_; }
  /// 1D boundaries, size() - 1 of them.
  const std::vector<double>& boundaries() const { return boundaries_; }
  std::size_t index_of(const Vec& x) const;

 private:
  std::vector<Vec> minima_;
  std::vector<double> boundaries_;
  int dimension_;
};

/// Equal-width bins on [lo, hi] plus an underflow bin (index 0) and an
/// overflow bin (index bins + 1). Only the first coordinate is binned.
struct Binning {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = 100;

  std::size_t slots() const { return bins + 2; }
  std::size_t slot_of(double x) const;
  double edge(std::size_t i) const { return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins); }
};

struct OccupationSummary {
  Binning binning;
  std::vector<double> masses;        ///< per slot, sums to 1
  std::vector<double> basin_masses;  ///< per basin, sums to 1
  double t_begin = 0.0;
  double t_end = 0.0;
  double total_weight = 0.0;
};

/// Weighted accumulation of visited states. Basin masses come from the raw
/// states, so they do not depend on the binning.
class OccupationAccumulator {
 public:
  OccupationAccumulator(Binning binning, BasinPartition basins);

  void add(const Vec& x, double weight);
  /// Adds another accumulator with the same binning and basins.
  void merge(const OccupationAccumulator& other);
  double total_weight() const { return total_; }
  /// Normalized summary; throws InsufficientDataError when nothing was added.
  OccupationSummary summary(double t_begin, double t_end) const;

 private:
  Binning binning_;
  BasinPartition basins_;
  std::vector<double> slots_;
  std::vector<double> basin_;
  double total_ = 0.0;
};

/// Time-weighted occupation over [t0, T]: sample i stands for [t_i, t_{i+1}).
OccupationSummary occupation(const Trajectory& trajectory, double t0, double T, const Binning& binning,
                             const BasinPartition& basins);
/// Pools several trajectories with equal weight per path.
OccupationSummary occupation(const std::vector<Trajectory>& ensemble, double t0, double T,
                             const Binning& binning, const BasinPartition& basins);

/// (1/t) int_0^t f(state_s) ds by the trapezoid rule on the recorded samples,
/// with linear interpolation when t falls between samples.
double cesaro(const std::vector<double>& times, const std::vector<double>& values, double t);
double cesaro(const Trajectory& trajectory, const std::function<double(const Vec&)>& f, double t);

inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

struct DivergenceEstimate {
  double kl = 0.0;  ///< +infinity when a nonempty slot has target mass < 1e-300
  double tv = 0.0;
  std::size_t samples = 0;
  std::size_t slots = 0;
  double bias_note = 0.0;  ///< (occupied slots - 1) / (2 n): leading plug-in KL bias
  bool pinsker_ok = false;  ///< tv^2 <= 2 kl + 0.01
  std::string diagnostic;
};

inline constexpr double kPinskerSlack = 0.01;

/// KL and TV between an empirical slot distribution and target slot masses.
DivergenceEstimate divergence(const std::vector<double>& counts, const std::vector<double>& target);

/// Exact bin masses of a 1D Gibbs measure on the slots of `binning`.
std::vector<double> gibbs_bin_masses(const GibbsMeasure& measure, const Binning& binning);

/// Histogram KL / TV of samples against the measure. Needs at least 1000
/// samples; `binning` defaults to `bins` equal bins across the measure's box.
DivergenceEstimate kl_to_gibbs(const std::vector<double>& samples, const GibbsMeasure& measure,
                               std::size_t bins, std::optional<Binning> binning = std::nullopt);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< RMS of the log-log fit
  std::size_t used = 0;
};

/// Least-squares slope of log H against log t. With `log_cube_correction`,
/// H is first divided by (log t)^3. Nonpositive or non-finite H values are
/// skipped; fewer than 3 usable points raise InsufficientDataError.
DecayFit decay_rate_fit(const std::vector<double>& t, const std::vector<double>& H,
                        bool log_cube_correction);

struct MeanThresholds {
  double flatten_fraction = 0.05;  ///< last-decade oscillation / full range
  double ratio_tolerance = 0.10;   ///< |mu/log t - gamma| relative to |gamma|
};

struct MeanTracker {
  std::vector<double> t;
  std::vector<double> m;            ///< (1/t) int_0^t Y
  std::vector<double> mu;           ///< mu-bar
  std::vector<double> mu_over_log;  ///< mu-bar / log t (NaN for t <= 1)
  double last_decade_oscillation = 0.0;
  double range = 0.0;
  double final_ratio = 0.0;  ///< mu-bar_T / log T
  bool mean_converges = false;
  bool diverges_log = false;
};

/// Trackers from a time series of mu-bar and of int_0^t Y (first coordinate).
/// The last decade is [T/10, T].
MeanTracker mean_trackers(const std::vector<double>& t, const std::vector<double>& mu,
                          const std::vector<double>& integral, double gamma_mean,
                          const MeanThresholds& thresholds = {});
MeanTracker mean_trackers(const Trajectory& trajectory, double gamma_mean,
                          const MeanThresholds& thresholds = {});

struct TightnessPoint {
  double t = 0.0;
  double tail_expectation = 0.0;  ///< E[V(Z) 1{V(Z) >= R}]
  double g_inner = 0.0;           ///< g(G^-1(t))
  double product = 0.0;
};

/// One grid point of the tightness series from the V(Z_t) values of an ensemble.
TightnessPoint tightness_point(double t, const std::vector<double>& v_values, double R, double g_inner);

struct TightnessReport {
  std::vector<TightnessPoint> points;
  double max_product = 0.0;
  bool non_increasing_after_burn_in = false;  ///< last product <= first post-burn-in product
};

TightnessReport tightness_report(std::vector<TightnessPoint> points, double burn_in_time);

struct Band {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr std::size_t kBootstrapResamples = 200;

/// Ensemble mean with a percentile bootstrap band (200 resamples, 95%).
Band bootstrap_mean(const std::vector<double>& values, RngStream& rng,
                    std::size_t resamples = kBootstrapResamples);

/// CSV series t,value,lo,hi.
void write_band_csv(std::ostream& out, const std::vector<double>& t, const std::vector<Band>& bands);
/// CSV series t,value.
void write_series_csv(std::ostream& out, const std::vector<double>& t, const std::vector<double>& values);

/// Burn-in: the first 10% of the horizon is discarded by every fit.
inline constexpr double kBurnInFraction = 0.1;

/// n geometric checkpoints from after the burn-in (0.1 T) to T inclusive.
std::vector<double> geometric_checkpoints(double horizon, std::size_t n);

}  // namespace sidiff
