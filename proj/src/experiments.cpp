#include "sidiff/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sidiff/csv.hpp"
#include "sidiff/diagnostics.hpp"
#include "sidiff/error.hpp"
#include "sidiff/gibbs.hpp"
#include "sidiff/landscape.hpp"
#include "sidiff/oracles.hpp"
#include "sidiff/sde.hpp"

#ifndef SIDIFF_VERSION_STRING
#define SIDIFF_VERSION_STRING "0.0.0"
#endif

namespace sidiff {

const char* version() { return SIDIFF_VERSION_STRING; }

bool ExperimentResult::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

const CriterionResult* ExperimentResult::find(const std::string& id) const {
  for (const auto& c : criteria)
    if (c.id == id) return &c;
  return nullptr;
}

namespace {

namespace fs = std::filesystem;

class Output {
 public:
  Output(const ExperimentConfig& config, ExperimentResult& result) : dir_(config.output_dir), result_(result) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ostringstream out;
    body(out);
    write_text_file(dir_ / name, out.str());
    result_.artifacts.push_back(name);
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  ExperimentResult& result_;
};

std::size_t to_step(double t, double dt) { return static_cast<std::size_t>(std::llround(t / dt)); }

/// Rounds a step index down to a multiple of the observation stride (at least one stride).
std::size_t align(std::size_t step, std::size_t stride) { return std::max(stride, step / stride * stride); }

CriterionResult blowup_criterion(const EnsembleResult& ens, double limit) {
  const double frac = static_cast<double>(ens.blown_up_count()) / static_cast<double>(ens.blown_up.size());
  CriterionResult c{"blowup_fraction", frac <= limit, {{"fraction", frac}, {"limit", limit}}, ""};
  if (!c.pass) c.detail = std::to_string(ens.blown_up_count()) + " paths exceeded the blow-up radius";
  return c;
}

std::vector<Vec> initial_points(const std::optional<Vec>& p) { return {p.value_or(Vec{0.0, 0.0})}; }

/// 2 x the largest barrier: highest non-minimum critical value minus lowest minimum.
double tightness_level(const Potential& potential, double fallback_eps2) {
  const auto& cps = potential.critical_points().points;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : cps) {
    if (p.kind == CriticalKind::local_min)
      lo = std::min(lo, p.value);
    else
      hi = std::max(hi, p.value);
  }
  if (!std::isfinite(hi) || !std::isfinite(lo)) return lo + 5.0 * fallback_eps2;
  return lo + 2.0 * (hi - lo);
}

// ---------------------------------------------------------------------------
// Annealed ensembles: per-path histogram counts over step windows.

struct Window {
  std::size_t begin = 0;  ///< first step included
  std::size_t end = 0;    ///< first step excluded
  Binning binning;
};

class AnnealObserver final : public PathObserver {
 public:
  AnnealObserver(std::size_t paths, const Potential& potential, const BasinPartition& basins, Window final_window,
                 std::vector<Window> windows, std::vector<std::size_t> snapshot_steps)
      : potential_(potential),
        basins_(basins),
        final_(final_window),
        windows_(std::move(windows)),
        snapshot_steps_(std::move(snapshot_steps)),
        final_slots_(paths * final_.binning.slots(), 0.0),
        final_basins_(paths * basins.size(), 0.0),
        final_count_(paths, 0.0),
        window_slots_(windows_.size()),
        snapshots_(snapshot_steps_.size(), std::vector<Vec>(paths, Vec{0.0, 0.0})),
        snapshot_seen_(snapshot_steps_.size(), std::vector<char>(paths, 0)) {
    for (std::size_t j = 0; j < windows_.size(); ++j) window_slots_[j].assign(paths * windows_[j].binning.slots(), 0.0);
  }

  void observe(std::size_t path, std::size_t step, double, const PathSnapshot& s) override {
    const Vec& x = s.x;
    if (step >= final_.begin && step < final_.end) {
      final_slots_[path * final_.binning.slots() + final_.binning.slot_of(x[0])] += 1.0;
      final_basins_[path * basins_.size() + basins_.index_of(x)] += 1.0;
      final_count_[path] += 1.0;
    }
    for (std::size_t j = 0; j < windows_.size(); ++j) {
      const Window& w = windows_[j];
      if (step >= w.begin && step < w.end)
        window_slots_[j][path * w.binning.slots() + w.binning.slot_of(x[0])] += 1.0;
    }
    for (std::size_t j = 0; j < snapshot_steps_.size(); ++j) {
      if (step == snapshot_steps_[j]) {
        snapshots_[j][path] = x;
        snapshot_seen_[j][path] = 1;
      }
    }
  }

  /// Pooled window counts over the paths that did not blow up, summed in path order.
  std::vector<double> pooled(std::size_t j, const std::vector<char>& blown) const {
    const std::size_t slots = windows_[j].binning.slots();
    std::vector<double> out(slots, 0.0);
    for (std::size_t p = 0; p < blown.size(); ++p)
      if (!blown[p])
        for (std::size_t k = 0; k < slots; ++k) out[k] += window_slots_[j][p * slots + k];
    return out;
  }

  /// Final-window occupation with equal weight per surviving path.
  std::vector<double> final_masses(const std::vector<char>& blown) const {
    const std::size_t slots = final_.binning.slots();
    std::vector<double> out(slots, 0.0);
    double n = 0.0;
    for (std::size_t p = 0; p < blown.size(); ++p) {
      if (blown[p] || final_count_[p] == 0.0) continue;
      n += 1.0;
      for (std::size_t k = 0; k < slots; ++k) out[k] += final_slots_[p * slots + k] / final_count_[p];
    }
    for (double& v : out) v /= n;
    return out;
  }

  /// Per surviving path, the final-window mass in basin b.
  std::vector<double> basin_mass(std::size_t b, const std::vector<char>& blown) const {
    std::vector<double> out;
    for (std::size_t p = 0; p < blown.size(); ++p)
      if (!blown[p] && final_count_[p] > 0.0) out.push_back(final_basins_[p * basins_.size() + b] / final_count_[p]);
    return out;
  }

  std::vector<double> snapshot_values(std::size_t j) const {
    std::vector<double> v;
    for (std::size_t p = 0; p < snapshots_[j].size(); ++p)
      if (snapshot_seen_[j][p]) v.push_back(potential_.value(snapshots_[j][p]));
    return v;
  }

 private:
  const Potential& potential_;
  const BasinPartition& basins_;
  Window final_;
  std::vector<Window> windows_;
  std::vector<std::size_t> snapshot_steps_;
  std::vector<double> final_slots_;
  std::vector<double> final_basins_;
  std::vector<double> final_count_;
  std::vector<std::vector<double>> window_slots_;
  std::vector<std::vector<Vec>> snapshots_;
  std::vector<std::vector<char>> snapshot_seen_;
};

Binning measure_binning(const GibbsMeasure& m, std::size_t bins) { return {m.box().lo[0], m.box().hi[0], bins}; }

struct CheckpointRow {
  double t = 0.0;
  AnnealingState state;
  DivergenceEstimate divergence;
};

void write_checkpoints(Output& out, const std::vector<CheckpointRow>& rows) {
  out.write("checkpoints.csv", [&](std::ostream& os) {
    CsvWriter csv(os, {"t", "eps2", "a", "kl", "tv", "samples", "pinsker_ok"});
    for (const auto& r : rows)
      csv.row({r.t, r.state.eps2, r.state.a, r.divergence.kl, r.divergence.tv,
               static_cast<double>(r.divergence.samples), r.divergence.pinsker_ok ? 1.0 : 0.0});
  });
}

void write_path0(Output& out, const ExperimentConfig& c, ProcessKind kind, const Potential& potential,
                 const Schedule& schedule, std::size_t steps) {
  SdeOptions opt;
  opt.dt = c.dt;
  opt.horizon = c.horizon;
  opt.stride = std::max<std::size_t>(c.observe_every, steps / 2000);
  RngStream rng(c.seed, 0);
  Trajectory traj;
  const Vec x0 = c.z0.value_or(Vec{0.0, 0.0});
  switch (kind) {
    case ProcessKind::Z_annealed: traj = simulate_Z_annealed(potential, schedule, c.r, x0, opt, rng); break;
    case ProcessKind::Y_mu:
      traj = simulate_Y(potential, schedule, c.r, c.y0.value_or(Vec{0.0, 0.0}), c.mu0.value_or(Vec{0.0, 0.0}), opt, rng);
      break;
    default: return;
  }
  out.write("trajectory_path0.csv", [&](std::ostream& os) { traj.write_csv(os); });
}

void run_annealed(const ExperimentConfig& c, ExperimentResult& result, Output& out) {
  const Potential potential = build_potential(c.potential);
  const Schedule schedule = build_schedule(c, potential);
  const ThresholdReport threshold = threshold_check(schedule, potential);
  result.diagnostics.push_back({"k", schedule.k()});
  result.diagnostics.push_back({"threshold", threshold.threshold});
  result.diagnostics.push_back({"osc_chi", threshold.two_osc_chi / 2.0});

  const bool free_energy = c.kind == ExperimentKind::free_energy_decay;
  const std::size_t steps = step_count(c.horizon, c.dt);
  // Free-energy checkpoints sample single instants, so observe them exactly.
  const std::size_t stride = free_energy ? std::max<std::size_t>(1, steps / 2000) : c.observe_every;
  const BasinPartition basins = BasinPartition::of(potential);

  // Checkpoints: free_energy_decay uses checkpoints + 1 points so that
  // `checkpoints` successive comparisons follow the burn-in.
  const std::vector<double> cp_times = geometric_checkpoints(c.horizon, free_energy ? c.checkpoints + 1 : c.checkpoints);
  std::vector<AnnealingState> cp_states;
  std::vector<GibbsMeasure> cp_measures;
  std::vector<Window> windows;
  std::vector<std::size_t> snapshot_steps;
  for (double t : cp_times) {
    const std::size_t end_step = align(to_step(t, c.dt), stride);
    const double tj = static_cast<double>(end_step) * c.dt;
    cp_states.push_back(annealing_state(schedule, c.r, tj));
    cp_measures.emplace_back(potential, cp_states.back().eps2, cp_states.back().a);
    const Binning b = measure_binning(cp_measures.back(), c.bins);
    if (free_energy)
      windows.push_back({end_step, end_step + 1, b});
    else
      windows.push_back({to_step((1.0 - c.window_fraction) * tj, c.dt), end_step, b});
    snapshot_steps.push_back(end_step);
  }

  const double final_begin_t = (1.0 - c.final_window_fraction) * c.horizon;
  const AnnealingState final_state = annealing_state(schedule, c.r, 0.5 * (final_begin_t + c.horizon));
  const GibbsMeasure final_measure(potential, final_state.eps2, final_state.a);
  const Window final_window{to_step(final_begin_t, c.dt), steps, measure_binning(final_measure, c.bins)};

  AnnealObserver observer(c.paths, potential, basins, final_window, windows, snapshot_steps);
  EnsembleSpec spec;
  spec.paths = c.paths;
  spec.horizon = c.horizon;
  spec.dt = c.dt;
  spec.seed = c.seed;
  spec.workers = c.workers;
  spec.observe_every = stride;
  const EnsembleResult ens =
      run_ensemble(ProcessKind::Z_annealed, potential, schedule, c.r, initial_points(c.z0), {}, {}, spec, observer);
  result.criteria.push_back(blowup_criterion(ens, c.thresholds.blowup_fraction));
  if (ens.blown_up_count() == ens.blown_up.size()) throw Error("every path blew up");

  // Checkpoint divergences.
  std::vector<CheckpointRow> rows;
  bool pinsker_all = true;
  for (std::size_t j = 0; j < windows.size(); ++j) {
    CheckpointRow row;
    row.t = static_cast<double>(snapshot_steps[j]) * c.dt;
    row.state = cp_states[j];
    row.divergence = divergence(observer.pooled(j, ens.blown_up), gibbs_bin_masses(cp_measures[j], windows[j].binning));
    row.divergence.pinsker_ok = row.divergence.tv * row.divergence.tv <= 2.0 * row.divergence.kl + c.thresholds.pinsker_slack;
    pinsker_all = pinsker_all && row.divergence.pinsker_ok;
    rows.push_back(row);
  }
  write_checkpoints(out, rows);
  {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) worst = std::max(worst, r.divergence.tv * r.divergence.tv - 2.0 * r.divergence.kl);
    result.criteria.push_back({"pinsker_all_checkpoints", pinsker_all,
                               {{"max_tv2_minus_2kl", worst}, {"slack", c.thresholds.pinsker_slack},
                                {"checkpoints", static_cast<double>(rows.size())}},
                               ""});
  }

  // Tightness and energy series at the checkpoint instants.
  RngStream boot(c.seed, stream_ids::kBootstrap);
  const double R = tightness_level(potential, final_state.eps2);
  std::vector<TightnessPoint> tight;
  std::vector<Band> energy;
  for (std::size_t j = 0; j < snapshot_steps.size(); ++j) {
    const auto v = observer.snapshot_values(j);
    if (v.empty()) continue;
    tight.push_back(tightness_point(rows[j].t, v, R, 1.0 / cp_states[j].eps2));
    energy.push_back(bootstrap_mean(v, boot));
  }
  const TightnessReport tr = tightness_report(tight, kBurnInFraction * c.horizon);
  result.diagnostics.push_back({"tightness_level_R", R});
  result.diagnostics.push_back({"tightness_max_product", tr.max_product});
  out.write("tightness.csv", [&](std::ostream& os) {
    CsvWriter csv(os, {"t", "tail_expectation", "g_inner", "product"});
    for (const auto& p : tr.points) csv.row({p.t, p.tail_expectation, p.g_inner, p.product});
  });
  out.write("energy.csv", [&](std::ostream& os) {
    std::vector<double> t;
    for (const auto& p : tr.points) t.push_back(p.t);
    write_band_csv(os, t, energy);
  });

  if (free_energy) {
    std::size_t decreases = 0;
    for (std::size_t j = 1; j < rows.size(); ++j)
      if (rows[j].divergence.kl < rows[j - 1].divergence.kl) ++decreases;
    const bool pass = decreases >= c.thresholds.min_decreases;
    result.criteria.push_back({"free_energy_decreases", pass,
                               {{"decreases", static_cast<double>(decreases)},
                                {"comparisons", static_cast<double>(rows.size() - 1)},
                                {"required", static_cast<double>(c.thresholds.min_decreases)},
                                {"kl_first", rows.front().divergence.kl},
                                {"kl_last", rows.back().divergence.kl}},
                               ""});
    std::vector<double> t;
    std::vector<double> H;
    for (const auto& r : rows) {
      t.push_back(r.t);
      H.push_back(r.divergence.kl);
    }
    try {
      const DecayFit fit = decay_rate_fit(t, H, true);
      result.diagnostics.push_back({"decay_slope_log_corrected", fit.slope});
      result.diagnostics.push_back({"decay_fit_residual", fit.residual});
    } catch (const InsufficientDataError& e) {
      result.warnings.push_back(std::string("decay fit skipped: ") + e.what());
    }
    return;
  }

  // Final-window occupation and basin masses.
  const std::vector<double> masses = observer.final_masses(ens.blown_up);
  const std::vector<double> target = gibbs_bin_masses(final_measure, final_window.binning);
  const DivergenceEstimate occ = divergence(masses, target);
  out.write("occupation.csv", [&](std::ostream& os) {
    CsvWriter csv(os, {"bin_lo", "bin_hi", "mass", "target"});
    const Binning& b = final_window.binning;
    for (std::size_t k = 0; k < b.slots(); ++k) {
      const double lo = k == 0 ? -std::numeric_limits<double>::infinity() : b.edge(k - 1);
      const double hi = k == b.slots() - 1 ? std::numeric_limits<double>::infinity() : b.edge(k);
      csv.row({lo, hi, masses[k], target[k]});
    }
  });

  const DiscreteLimitMeasure limit = pi0(potential);
  std::vector<double> expected(basins.size(), 0.0);
  for (std::size_t i = 0; i < limit.support.size(); ++i) expected[basins.index_of(limit.support[i])] += limit.weights[i];
  std::vector<Band> basin_bands;
  for (std::size_t b = 0; b < basins.size(); ++b) basin_bands.push_back(bootstrap_mean(observer.basin_mass(b, ens.blown_up), boot));
  out.write("basin_masses.csv", [&](std::ostream& os) {
    CsvWriter csv(os, {"basin", "location", "mass", "lo", "hi", "pi0_weight"});
    for (std::size_t b = 0; b < basins.size(); ++b)
      csv.row({static_cast<double>(b), basins.minima()[b][0], basin_bands[b].value, basin_bands[b].lo,
               basin_bands[b].hi, expected[b]});
  });

  if (c.kind == ExperimentKind::anneal_to_pi0) {
    double worst = 0.0;
    CriterionResult basin{"basin_masses_match_pi0", true, {}, ""};
    for (std::size_t b = 0; b < basins.size(); ++b) {
      const double diff = std::abs(basin_bands[b].value - expected[b]);
      worst = std::max(worst, diff);
      basin.measured.push_back({"mass_" + std::to_string(b), basin_bands[b].value});
      basin.measured.push_back({"pi0_" + std::to_string(b), expected[b]});
    }
    basin.measured.push_back({"max_abs_diff", worst});
    basin.measured.push_back({"tolerance", c.thresholds.basin_tolerance});
    basin.pass = worst <= c.thresholds.basin_tolerance;
    result.criteria.push_back(basin);
    result.criteria.push_back({"occupation_tv_to_gibbs", occ.tv < c.thresholds.occupation_tv,
                               {{"tv", occ.tv}, {"kl", occ.kl}, {"tolerance", c.thresholds.occupation_tv},
                                {"eps2", final_state.eps2}},
                               ""});
  } else {
    const std::size_t start_basin = basins.index_of(*c.z0);
    const auto per_path = observer.basin_mass(start_basin, ens.blown_up);
    double frozen = 0.0;
    for (double m : per_path)
      if (m > 0.5) frozen += 1.0;
    const double fraction = frozen / static_cast<double>(per_path.size());
    result.criteria.push_back({"paths_frozen_in_start_basin", fraction >= c.thresholds.freeze_fraction,
                               {{"fraction", fraction},
                                {"mean_mass", basin_bands[start_basin].value},
                                {"basin_location", basins.minima()[start_basin][0]},
                                {"required", c.thresholds.freeze_fraction}},
                               ""});
  }
  write_path0(out, c, ProcessKind::Z_annealed, potential, schedule, steps);
}

// ---------------------------------------------------------------------------
// Constant g: mean trackers and the coupled pair.

/// Observation indices kept for the time series: about 100 per decade.
std::vector<std::size_t> series_indices(std::size_t observations) {
  std::vector<std::size_t> idx{0};
  for (int i = 0;; ++i) {
    const auto k = static_cast<std::size_t>(std::llround(std::pow(10.0, i / 100.0)));
    if (k > observations) break;
    if (k != idx.back()) idx.push_back(k);
  }
  if (idx.back() != observations) idx.push_back(observations);
  return idx;
}

class SeriesObserver final : public PathObserver {
 public:
  SeriesObserver(std::size_t paths, std::size_t stride, double dt, std::vector<std::size_t> indices, bool gaps)
      : stride_(stride), dt_(dt), indices_(std::move(indices)), slot_(indices_.back() + 1, -1),
        mu_(paths * indices_.size(), 0.0), integral_(paths * indices_.size(), 0.0), gaps_(gaps) {
    for (std::size_t i = 0; i < indices_.size(); ++i) slot_[indices_[i]] = static_cast<long>(i);
    if (gaps_) {
      gap_series_.assign(paths * indices_.size(), 0.0);
      decades_ = static_cast<std::size_t>(std::max(1.0, std::floor(std::log10(static_cast<double>(indices_.back()) *
                                                                               static_cast<double>(stride) * dt) + 1e-9)));
      decade_sum_.assign(paths * decades_, 0.0);
      decade_count_.assign(paths * decades_, 0.0);
    }
  }

  void observe(std::size_t path, std::size_t step, double, const PathSnapshot& s) override {
    if (step % stride_ != 0) return;
    const std::size_t k = step / stride_;
    if (k < slot_.size() && slot_[k] >= 0) {
      const std::size_t i = path * indices_.size() + static_cast<std::size_t>(slot_[k]);
      mu_[i] = s.mu[0];
      integral_[i] = s.integral[0];
      if (gaps_) gap_series_[i] = norm2(s.x - s.z);
    }
    if (gaps_) {
      // Decade d covers [10^d, 10^(d+1)) in time, d = 0 .. decades - 1.
      const double t = static_cast<double>(step) * dt_;
      if (t >= 1.0) {
        const auto d = static_cast<std::size_t>(std::floor(std::log10(t)));
        if (d < decades_) {
          decade_sum_[path * decades_ + d] += norm2(s.x - s.z);
          decade_count_[path * decades_ + d] += 1.0;
        }
      }
    }
  }

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t decades() const { return decades_; }

  std::vector<double> column(const std::vector<double>& data, std::size_t i, const std::vector<char>& blown) const {
    std::vector<double> v;
    for (std::size_t p = 0; p < blown.size(); ++p)
      if (!blown[p]) v.push_back(data[p * indices_.size() + i]);
    return v;
  }
  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& integral() const { return integral_; }
  const std::vector<double>& gap_series() const { return gap_series_; }

  /// Ensemble mean over surviving paths of the time-averaged squared gap in decade d.
  double decade_mean(std::size_t d, const std::vector<char>& blown) const {
    double sum = 0.0;
    double n = 0.0;
    for (std::size_t p = 0; p < blown.size(); ++p) {
      if (blown[p] || decade_count_[p * decades_ + d] == 0.0) continue;
      sum += decade_sum_[p * decades_ + d] / decade_count_[p * decades_ + d];
      n += 1.0;
    }
    return n > 0.0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
  }

 private:
  std::size_t stride_;
  double dt_;
  std::vector<std::size_t> indices_;
  std::vector<long> slot_;
  std::vector<double> mu_;
  std::vector<double> integral_;
  bool gaps_;
  std::vector<double> gap_series_;
  std::size_t decades_ = 0;
  std::vector<double> decade_sum_;
  std::vector<double> decade_count_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void run_constant_g(const ExperimentConfig& c, ExperimentResult& result, Output& out) {
  const Potential potential = build_potential(c.potential);
  const Schedule schedule = Schedule::constant(1.0);
  const GammaStats gamma = gamma_stats(potential);
  result.diagnostics.push_back({"gamma_mean", gamma.mean});
  result.diagnostics.push_back({"gamma_second_moment", gamma.second_moment});

  const std::size_t steps = step_count(c.horizon, c.dt);
  const std::size_t observations = steps / c.observe_every;
  EnsembleSpec spec;
  spec.paths = c.paths;
  spec.horizon = c.horizon;
  spec.dt = c.dt;
  spec.seed = c.seed;
  spec.workers = c.workers;
  spec.observe_every = c.observe_every;

  const Vec y0 = c.y0.value_or(Vec{0.0, 0.0});
  const Vec mu0 = c.mu0.value_or(Vec{0.0, 0.0});
  SeriesObserver series(c.paths, c.observe_every, c.dt, series_indices(observations), false);
  const EnsembleResult ens =
      run_ensemble(ProcessKind::Y_mu, potential, schedule, c.r, {y0}, {mu0}, {}, spec, series);
  result.criteria.push_back(blowup_criterion(ens, c.thresholds.blowup_fraction));

  RngStream boot(c.seed, stream_ids::kBootstrap);
  std::vector<double> t;
  std::vector<double> mu_mean;
  std::vector<double> int_mean;
  std::vector<Band> mu_band;
  std::vector<Band> m_band;
  std::vector<Band> ratio_band;
  for (std::size_t i = 0; i < series.indices().size(); ++i) {
    const double ti = static_cast<double>(series.indices()[i] * c.observe_every) * c.dt;
    const auto mu = series.column(series.mu(), i, ens.blown_up);
    const auto in = series.column(series.integral(), i, ens.blown_up);
    t.push_back(ti);
    mu_mean.push_back(mean_of(mu));
    int_mean.push_back(mean_of(in));
    mu_band.push_back(bootstrap_mean(mu, boot));
    if (ti > 0.0) {
      std::vector<double> m(in);
      for (double& v : m) v /= ti;
      m_band.push_back(bootstrap_mean(m, boot));
    } else {
      m_band.push_back({std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
    }
    const double lt = ti > 1.0 ? std::log(ti) : std::numeric_limits<double>::quiet_NaN();
    ratio_band.push_back({mu_band.back().value / lt, mu_band.back().lo / lt, mu_band.back().hi / lt});
  }
  out.write("mu_bar.csv", [&](std::ostream& os) { write_band_csv(os, t, mu_band); });
  out.write("m_t.csv", [&](std::ostream& os) { write_band_csv(os, t, m_band); });
  out.write("mu_over_log_t.csv", [&](std::ostream& os) { write_band_csv(os, t, ratio_band); });

  MeanThresholds mt;
  mt.flatten_fraction = c.thresholds.flatten_fraction;
  mt.ratio_tolerance = c.thresholds.ratio_tolerance;
  const MeanTracker tracker = mean_trackers(t, mu_mean, int_mean, gamma.mean, mt);
  result.diagnostics.push_back({"final_mu_bar", tracker.mu.back()});
  result.diagnostics.push_back({"final_m", tracker.m.back()});
  const bool drifting = std::abs(gamma.mean) > 1e-6;
  if (drifting) {
    result.criteria.push_back({"mean_log_ratio", tracker.diverges_log,
                               {{"mu_over_log_T", tracker.final_ratio},
                                {"gamma_mean", gamma.mean},
                                {"tolerance", c.thresholds.ratio_tolerance}},
                               ""});
  } else {
    result.criteria.push_back({"mean_flattens", tracker.mean_converges,
                               {{"last_decade_oscillation", tracker.last_decade_oscillation},
                                {"range", tracker.range},
                                {"fraction", tracker.range > 0.0 ? tracker.last_decade_oscillation / tracker.range
                                                                 : std::numeric_limits<double>::infinity()},
                                {"tolerance", c.thresholds.flatten_fraction}},
                               ""});
  }

  if (c.coupled) {
    const Vec z0 = c.z0.value_or(y0);
    SeriesObserver pair(c.paths, c.observe_every, c.dt, series_indices(observations), true);
    const EnsembleResult ens2 =
        run_ensemble(ProcessKind::coupled_YZ, potential, schedule, c.r, {y0}, {mu0}, {z0}, spec, pair);
    CriterionResult blow = blowup_criterion(ens2, c.thresholds.blowup_fraction);
    blow.id = "coupled_blowup_fraction";
    result.criteria.push_back(blow);
    std::vector<Band> gap_band;
    for (std::size_t i = 0; i < pair.indices().size(); ++i)
      gap_band.push_back(bootstrap_mean(pair.column(pair.gap_series(), i, ens2.blown_up), boot));
    out.write("gap2.csv", [&](std::ostream& os) { write_band_csv(os, t, gap_band); });
    const double first = pair.decade_mean(0, ens2.blown_up);
    const double last = pair.decade_mean(pair.decades() - 1, ens2.blown_up);
    const bool pass = pair.decades() >= 2 && std::isfinite(first) && std::isfinite(last) &&
                      last * c.thresholds.gap_decay_factor <= first;
    result.criteria.push_back({"coupled_gap_decay", pass,
                               {{"first_decade_mean_gap2", first},
                                {"last_decade_mean_gap2", last},
                                {"decades", static_cast<double>(pair.decades())},
                                {"required_factor", c.thresholds.gap_decay_factor}},
                               ""});
  }
  write_path0(out, c, ProcessKind::Y_mu, potential, schedule, steps);
}

// ---------------------------------------------------------------------------
// Landscape and spectrum (no simulation).

void run_landscape(const ExperimentConfig& c, ExperimentResult& result, Output& out) {
  const Potential potential = build_potential(c.potential);
  const Potential reference = build_potential(c.landscape.reference);
  const Schedule schedule = build_schedule(c, potential);
  const Thresholds& th = c.thresholds;

  const MaximalHeight limit = maximal_height(potential, kInfiniteA, c.landscape.h);
  result.diagnostics.push_back({"m_infinity", limit.m});
  result.diagnostics.push_back({"m_infinity_refined", limit.refined_m});
  result.diagnostics.push_back({"osc_chi", osc_chi(potential)});
  if (limit.refinement_warning)
    result.warnings.push_back("maximal height changes by more than 1% when h is halved");
  if (potential.dimension() == 1) {
    const double oracle = interval_maximal_height_1d(potential);
    const double err = std::abs(limit.m - oracle);
    result.criteria.push_back({"maximal_height_matches_oracle", err <= th.m_tolerance * std::max(oracle, 1e-300),
                               {{"m", limit.m}, {"oracle", oracle}, {"relative_tolerance", th.m_tolerance}},
                               ""});
  }
  result.criteria.push_back({"z0_independence", limit.z0_spread <= th.z0_tolerance,
                             {{"spread", limit.z0_spread},
                              {"global_min_nodes", static_cast<double>(limit.global_min_nodes)},
                              {"tolerance", th.z0_tolerance}},
                             ""});

  const MaximalHeight convex = maximal_height(reference, kInfiniteA, c.landscape.h);
  result.criteria.push_back({"reference_height_zero", convex.m == 0.0, {{"m", convex.m}}, ""});

  const LandscapeReport report = landscape_report(potential, schedule, c.r, c.landscape.t_grid, c.landscape.h);
  out.write("landscape.csv", [&](std::ostream& os) { write_landscape_csv(os, report); });
  {
    CriterionResult cr{"scaled_gap_bounded", report.bound_stable, {{"fitted_C", report.fitted_C}}, ""};
    for (const auto& row : report.rows) cr.measured.push_back({"scaled_gap_t" + format_double(row.t), row.scaled_gap});
    result.criteria.push_back(cr);
  }

  if (reference.dimension() == 1) {
    const Spectrum ou = generator_spectrum_1d(reference, 1.0, kInfiniteA, c.landscape.ou_h);
    const double expected = reference.hessian({0.0, 0.0}).xx;
    result.criteria.push_back({"reference_spectral_gap", std::abs(ou.lambda2 - expected) <= th.ou_tolerance * expected,
                               {{"lambda2", ou.lambda2}, {"expected", expected}, {"nodes", static_cast<double>(ou.nodes)},
                                {"relative_tolerance", th.ou_tolerance}},
                               ""});
  }
  if (potential.dimension() == 1) {
    std::vector<SpectrumRow> rows;
    bool lambda1_ok = true;
    double worst_lambda1 = 0.0;
    for (double e2 : c.landscape.eps2_grid) {
      const Spectrum s = generator_spectrum_1d(potential, e2, kInfiniteA, c.landscape.spectrum_h_fraction * std::sqrt(e2));
      rows.push_back({e2, s.lambda2, e2 * std::log(s.lambda2)});
      lambda1_ok = lambda1_ok && s.lambda1_ok;
      worst_lambda1 = std::max(worst_lambda1, std::abs(s.lambda1) / s.lambda2);
    }
    out.write("spectrum.csv", [&](std::ostream& os) { write_spectrum_csv(os, rows); });
    result.criteria.push_back({"lambda1_zero", lambda1_ok, {{"max_relative_lambda1", worst_lambda1}}, ""});
    const double target = 2.0 * limit.m;
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      monotone = monotone && std::abs(-rows[i].eps2_log_lambda2 - target) < std::abs(-rows[i - 1].eps2_log_lambda2 - target);
    const double last = -rows.back().eps2_log_lambda2;
    const bool close = std::abs(last - target) <= th.jacquot_tolerance * target;
    CriterionResult cr{"jacquot_trend", monotone && close,
                       {{"final_minus_eps2_log_lambda2", last}, {"two_m", target}, {"relative_tolerance", th.jacquot_tolerance}},
                       ""};
    if (!monotone) cr.detail = "approach to 2m is not monotone over the eps^2 grid";
    result.criteria.push_back(cr);
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.kind = config.kind;
  result.config_hash = config_hash(config);
  for (const auto& issue : validate(config)) {
    if (issue.severity == ValidationIssue::Severity::error) throw ConfigError(issue.key + ": " + issue.message);
    result.warnings.push_back(issue.key + ": " + issue.message);
  }
  Output out(config, result);
  switch (config.kind) {
    case ExperimentKind::anneal_to_pi0:
    case ExperimentKind::freeze_subcritical:
    case ExperimentKind::free_energy_decay: run_annealed(config, result, out); break;
    case ExperimentKind::constant_g_mean: run_constant_g(config, result, out); break;
    case ExperimentKind::landscape_spectrum: run_landscape(config, result, out); break;
  }
  result.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text_file(out.dir() / "verdict.json", verdict_json(config, result));
  return result;
}

std::string verdict_json(const ExperimentConfig& config, const ExperimentResult& result) {
  using nlohmann::ordered_json;
  auto number = [](double v) -> ordered_json {
    if (std::isfinite(v)) return v;
    return format_double(v);
  };
  ordered_json doc;
  doc["experiment"] = to_string(config.kind);
  doc["version"] = version();
  doc["config_hash"] = result.config_hash;
  doc["seed"] = config.seed;
  doc["all_pass"] = result.all_pass();
  ordered_json criteria = ordered_json::array();
  for (const auto& c : result.criteria) {
    ordered_json item;
    item["id"] = c.id;
    item["pass"] = c.pass;
    ordered_json measured = ordered_json::object();
    for (const auto& [k, v] : c.measured) measured[k] = number(v);
    item["measured"] = measured;
    if (!c.detail.empty()) item["detail"] = c.detail;
    criteria.push_back(item);
  }
  doc["criteria"] = criteria;
  ordered_json diag = ordered_json::object();
  for (const auto& [k, v] : result.diagnostics) diag[k] = number(v);
  doc["diagnostics"] = diag;
  doc["warnings"] = result.warnings;
  doc["artifacts"] = result.artifacts;
  doc["wall_clock_seconds"] = result.wall_clock_seconds;
  return doc.dump(2) + "\n";
}

}  // namespace sidiff
