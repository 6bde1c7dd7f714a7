#include "sidiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "sidiff/csv.hpp"
#include "sidiff/error.hpp"
#include "sidiff/quadrature.hpp"

namespace sidiff {

BasinPartition::BasinPartition(std::vector<Vec> minima, int dimension)
    : minima_(std::move(minima)), dimension_(dimension) {
  if (minima_.empty()) throw DomainError("basin partition needs at least one minimum");
  if (dimension_ == 1) {
    std::sort(minima_.begin(), minima_.end(), [](const Vec& a, const Vec& b) { return a[0] < b[0]; });
    for (std::size_t i = 1; i < minima_.size(); ++i)
      boundaries_.push_back(0.5 * (minima_[i - 1][0] + minima_[i][0]));
  }
}

BasinPartition BasinPartition::of(const Potential& potential) {
  std::vector<Vec> minima;
  for (const auto& p : potential.critical_points().local_minima()) minima.push_back(p.location);
  return BasinPartition(std::move(minima), potential.dimension());
}

std::size_t BasinPartition::index_of(const Vec& x) const {
  if (dimension_ == 1)
    return static_cast<std::size_t>(std::upper_bound(boundaries_.begin(), boundaries_.end(), x[0]) -
                                    boundaries_.begin());
  std::size_t best = 0;
  for (std::size_t i = 1; i < minima_.size(); ++i)
    if (norm2(x - minima_[i]) < norm2(x - minima_[best])) best = i;
  return best;
}

std::size_t Binning::slot_of(double x) const {
  if (x < lo) return 0;
  if (x >= hi) return bins + 1;
  const auto i = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
  return std::min(i, bins - 1) + 1;
}

OccupationAccumulator::OccupationAccumulator(Binning binning, BasinPartition basins)
    : binning_(binning), basins_(std::move(basins)), slots_(binning_.slots(), 0.0), basin_(basins_.size(), 0.0) {
  if (binning_.bins == 0 || !(binning_.hi > binning_.lo)) throw DomainError("binning needs bins > 0 and hi > lo");
}

void OccupationAccumulator::add(const Vec& x, double weight) {
  if (!(weight > 0.0)) return;
  slots_[binning_.slot_of(x[0])] += weight;
  basin_[basins_.index_of(x)] += weight;
  total_ += weight;
}

void OccupationAccumulator::merge(const OccupationAccumulator& other) {
  for (std::size_t i = 0; i < slots_.size(); ++i) slots_[i] += other.slots_[i];
  for (std::size_t i = 0; i < basin_.size(); ++i) basin_[i] += other.basin_[i];
  total_ += other.total_;
}

OccupationSummary OccupationAccumulator::summary(double t_begin, double t_end) const {
  if (!(total_ > 0.0)) throw InsufficientDataError("occupation window holds no samples");
  OccupationSummary s;
  s.binning = binning_;
  s.t_begin = t_begin;
  s.t_end = t_end;
  s.total_weight = total_;
  for (double v : slots_) s.masses.push_back(v / total_);
  for (double v : basin_) s.basin_masses.push_back(v / total_);
  return s;
}

namespace {

void add_window(OccupationAccumulator& acc, const Trajectory& traj, double t0, double T, double scale) {
  const auto& t = traj.t;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double w = std::min(t[i + 1], T) - std::max(t[i], t0);
    if (w > 0.0) acc.add(traj.states[i].x, scale * w);
  }
}

void check_window(double t0, double T) {
  if (!(T > t0)) throw InsufficientDataError("occupation window is empty");
}

}  // namespace

OccupationSummary occupation(const Trajectory& trajectory, double t0, double T, const Binning& binning,
                             const BasinPartition& basins) {
  check_window(t0, T);
  OccupationAccumulator acc(binning, basins);
  add_window(acc, trajectory, t0, T, 1.0);
  return acc.summary(t0, T);
}

OccupationSummary occupation(const std::vector<Trajectory>& ensemble, double t0, double T,
                             const Binning& binning, const BasinPartition& basins) {
  check_window(t0, T);
  OccupationAccumulator acc(binning, basins);
  for (const auto& traj : ensemble) {
    OccupationAccumulator one(binning, basins);
    add_window(one, traj, t0, T, 1.0);
    if (one.total_weight() > 0.0) {
      OccupationAccumulator scaled(binning, basins);
      add_window(scaled, traj, t0, T, 1.0 / one.total_weight());
      acc.merge(scaled);
    }
  }
  return acc.summary(t0, T);
}

double cesaro(const std::vector<double>& times, const std::vector<double>& values, double t) {
  if (times.size() != values.size() || times.empty()) throw DomainError("cesaro needs matching, nonempty series");
  if (!(t > times.front()) || t > times.back()) throw DomainError("cesaro time outside the recorded span");
  CompensatedSum integral;
  for (std::size_t i = 0; i + 1 < times.size() && times[i] < t; ++i) {
    const double t1 = std::min(times[i + 1], t);
    const double w = (t1 - times[i]) / (times[i + 1] - times[i]);
    const double v1 = values[i] + w * (values[i + 1] - values[i]);
    integral.add(0.5 * (values[i] + v1) * (t1 - times[i]));
  }
  return integral.value() / (t - times.front());
}

double cesaro(const Trajectory& trajectory, const std::function<double(const Vec&)>& f, double t) {
  std::vector<double> values;
  values.reserve(trajectory.states.size());
  for (const auto& s : trajectory.states) values.push_back(f(s.x));
  return cesaro(trajectory.t, values, t);
}

DivergenceEstimate divergence(const std::vector<double>& counts, const std::vector<double>& target) {
  if (counts.size() != target.size() || counts.empty()) throw DomainError("divergence needs matching slot vectors");
  double n = 0.0;
  for (double c : counts) n += c;
  if (!(n > 0.0)) throw InsufficientDataError("divergence needs a nonempty sample");
  double target_total = 0.0;
  for (double q : target) target_total += q;

  DivergenceEstimate d;
  d.samples = static_cast<std::size_t>(std::llround(n));
  d.slots = counts.size();
  CompensatedSum kl;
  CompensatedSum tv;
  std::size_t occupied = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double p = counts[i] / n;
    const double q = target[i] / target_total;
    tv.add(std::abs(p - q));
    if (p <= 0.0) continue;
    ++occupied;
    if (q < 1e-300) {
      d.kl = kInfiniteDivergence;
      d.diagnostic = "slot " + std::to_string(i) + " holds samples but has target mass < 1e-300";
      continue;
    }
    if (std::isfinite(d.kl)) kl.add(p * std::log(p / q));
  }
  if (std::isfinite(d.kl)) d.kl = kl.value();
  d.tv = std::clamp(0.5 * tv.value(), 0.0, 1.0);
  d.bias_note = occupied > 0 ? static_cast<double>(occupied - 1) / (2.0 * n) : 0.0;
  d.pinsker_ok = d.tv * d.tv <= 2.0 * d.kl + kPinskerSlack;
  return d;
}

std::vector<double> gibbs_bin_masses(const GibbsMeasure& measure, const Binning& binning) {
  if (measure.dimension() != 1) throw UnsupportedError("bin masses are defined for 1D measures");
  const SearchBox& box = measure.box();
  std::vector<double> masses(binning.slots(), 0.0);
  masses.front() = measure.mass(box.lo[0], binning.lo);
  for (std::size_t i = 0; i < binning.bins; ++i) masses[i + 1] = measure.mass(binning.edge(i), binning.edge(i + 1));
  masses.back() = measure.mass(binning.hi, box.hi[0]);
  return masses;
}

DivergenceEstimate kl_to_gibbs(const std::vector<double>& samples, const GibbsMeasure& measure,
                               std::size_t bins, std::optional<Binning> binning) {
  if (samples.size() < 1000) throw InsufficientDataError("KL estimate needs at least 1000 samples");
  const Binning b = binning ? *binning : Binning{measure.box().lo[0], measure.box().hi[0], bins};
  std::vector<double> counts(b.slots(), 0.0);
  for (double x : samples) counts[b.slot_of(x)] += 1.0;
  return divergence(counts, gibbs_bin_masses(measure, b));
}

DecayFit decay_rate_fit(const std::vector<double>& t, const std::vector<double>& H, bool log_cube_correction) {
  if (t.size() != H.size()) throw DomainError("decay fit needs matching series");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(H[i] > 0.0) || !std::isfinite(H[i]) || !(t[i] > 1.0)) continue;
    const double lt = std::log(t[i]);
    double y = std::log(H[i]);
    if (log_cube_correction) y -= 3.0 * std::log(lt);
    lx.push_back(lt);
    ly.push_back(y);
  }
  if (lx.size() < 3) throw InsufficientDataError("decay fit needs at least 3 positive points");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("decay fit needs distinct times");
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / n);
  fit.used = lx.size();
  return fit;
}

MeanTracker mean_trackers(const std::vector<double>& t, const std::vector<double>& mu,
                          const std::vector<double>& integral, double gamma_mean,
                          const MeanThresholds& thresholds) {
  if (t.size() != mu.size() || t.size() != integral.size() || t.size() < 2)
    throw InsufficientDataError("mean trackers need at least two matching samples");
  MeanTracker out;
  out.t = t;
  out.mu = mu;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.m.push_back(t[i] > 0.0 ? integral[i] / t[i] : std::numeric_limits<double>::quiet_NaN());
    out.mu_over_log.push_back(t[i] > 1.0 ? mu[i] / std::log(t[i]) : std::numeric_limits<double>::quiet_NaN());
  }
  const double T = t.back();
  double lo = mu.front();
  double hi = mu.front();
  double dlo = mu.back();
  double dhi = mu.back();
  for (std::size_t i = 0; i < t.size(); ++i) {
    lo = std::min(lo, mu[i]);
    hi = std::max(hi, mu[i]);
    if (t[i] >= T / 10.0) {
      dlo = std::min(dlo, mu[i]);
      dhi = std::max(dhi, mu[i]);
    }
  }
  out.range = hi - lo;
  out.last_decade_oscillation = dhi - dlo;
  out.final_ratio = out.mu_over_log.back();
  out.mean_converges = out.range > 0.0 && out.last_decade_oscillation < thresholds.flatten_fraction * out.range;
  out.diverges_log = gamma_mean != 0.0 && std::isfinite(out.final_ratio) &&
                     std::abs(out.final_ratio - gamma_mean) <= thresholds.ratio_tolerance * std::abs(gamma_mean);
  return out;
}

MeanTracker mean_trackers(const Trajectory& trajectory, double gamma_mean, const MeanThresholds& thresholds) {
  if (trajectory.kind != ProcessKind::Y_mu && trajectory.kind != ProcessKind::coupled_YZ)
    throw DomainError("mean trackers need a Y trajectory with its mu-bar channel");
  std::vector<double> mu;
  std::vector<double> integral;
  for (const auto& s : trajectory.states) {
    mu.push_back(s.mu[0]);
    integral.push_back(s.integral[0]);
  }
  return mean_trackers(trajectory.t, mu, integral, gamma_mean, thresholds);
}

TightnessPoint tightness_point(double t, const std::vector<double>& v_values, double R, double g_inner) {
  if (v_values.empty()) throw InsufficientDataError("tightness point needs samples");
  CompensatedSum s;
  for (double v : v_values)
    if (v >= R) s.add(v);
  TightnessPoint p;
  p.t = t;
  p.tail_expectation = s.value() / static_cast<double>(v_values.size());
  p.g_inner = g_inner;
  p.product = p.tail_expectation * g_inner;
  return p;
}

TightnessReport tightness_report(std::vector<TightnessPoint> points, double burn_in_time) {
  TightnessReport r;
  r.points = std::move(points);
  std::optional<double> first;
  for (const auto& p : r.points) {
    r.max_product = std::max(r.max_product, p.product);
    if (!first && p.t >= burn_in_time) first = p.product;
  }
  r.non_increasing_after_burn_in =
      std::isfinite(r.max_product) && (!first || r.points.back().product <= *first);
  return r;
}

Band bootstrap_mean(const std::vector<double>& values, RngStream& rng, std::size_t resamples) {
  if (values.empty()) throw InsufficientDataError("bootstrap needs values");
  const std::size_t n = values.size();
  CompensatedSum total;
  for (double v : values) total.add(v);
  Band band;
  band.value = total.value() / static_cast<double>(n);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s.add(values[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))]);
    m = s.value() / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto pick = [&](double q) {
    const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1) + 0.5));
    return means[std::min(i, resamples - 1)];
  };
  band.lo = pick(0.025);
  band.hi = pick(0.975);
  return band;
}

void write_band_csv(std::ostream& out, const std::vector<double>& t, const std::vector<Band>& bands) {
  CsvWriter csv(out, {"t", "value", "lo", "hi"});
  for (std::size_t i = 0; i < t.size(); ++i) csv.row({t[i], bands[i].value, bands[i].lo, bands[i].hi});
}

void write_series_csv(std::ostream& out, const std::vector<double>& t, const std::vector<double>& values) {
  CsvWriter csv(out, {"t", "value"});
  for (std::size_t i = 0; i < t.size(); ++i) csv.row({t[i], values[i]});
}

std::vector<double> geometric_checkpoints(double horizon, std::size_t n) {
  if (n < 2 || !(horizon > 0.0)) throw DomainError("geometric checkpoints need n >= 2 and a positive horizon");
  std::vector<double> t(n);
  const double first = kBurnInFraction * horizon;
  for (std::size_t j = 0; j < n; ++j)
    t[j] = j + 1 == n ? horizon : first * std::pow(10.0, static_cast<double>(j) / static_cast<double>(n - 1));
  return t;
}

}  // namespace sidiff
