#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sidiff/linalg.hpp"
#include "sidiff/potential.hpp"
#include "sidiff/schedule.hpp"

namespace sidiff {

enum class ExperimentKind { anneal_to_pi0, freeze_subcritical, constant_g_mean, landscape_spectrum, free_energy_decay };

const char* to_string(ExperimentKind kind);

struct PotentialSpec {
  std::string id;
  ParamMap params;
};

struct ScheduleSpec {
  std::string family = "logarithmic";
  std::optional<double> k;
  std::optional<double> k_threshold_multiple;  ///< k = multiple * max(2 osc chi, d/4)
  double shift = 2.718281828459045;
  double g0 = 1.0;
};

/// Finite-sample verdict thresholds.
struct Thresholds {
  double basin_tolerance = 0.08;
  double occupation_tv = 0.1;
  double pinsker_slack = 0.01;
  double freeze_fraction = 0.9;
  std::size_t min_decreases = 4;
  double ratio_tolerance = 0.10;
  double flatten_fraction = 0.05;
  double gap_decay_factor = 10.0;
  double blowup_fraction = 0.01;
  double m_tolerance = 0.01;
  double ou_tolerance = 0.01;
  double jacquot_tolerance = 0.25;
  double z0_tolerance = 1e-9;
};

struct LandscapeSpec {
  double h = 1e-3;
  std::vector<double> t_grid{10.0, 100.0, 1000.0, 10000.0};
  std::vector<double> eps2_grid{0.5, 0.33, 0.25, 0.2};
  double spectrum_h_fraction = 0.05;  ///< spectrum grid spacing as a fraction of eps
  double ou_h = 1e-3;
  PotentialSpec reference{"quadratic", {}};
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::anneal_to_pi0;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  PotentialSpec potential;
  ScheduleSpec schedule;
  double r = 1.0;
  std::optional<Vec> z0;
  std::optional<Vec> y0;
  std::optional<Vec> mu0;
  std::size_t paths = 256;
  unsigned workers = 0;
  double horizon = 1e4;
  double dt = 1e-3;
  std::size_t observe_every = 100;
  std::size_t bins = 100;
  std::size_t checkpoints = 5;
  double window_fraction = 0.05;
  double final_window_fraction = 0.1;
  bool coupled = false;
  Thresholds thresholds;
  LandscapeSpec landscape;
  /// Sorted-key JSON dump of the input document; the config hash is taken over it.
  std::string canonical;
};

struct ValidationIssue {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string key;
  std::string message;
};

struct ParsedConfig {
  std::optional<ExperimentConfig> config;  ///< present iff there are no errors
  std::vector<ValidationIssue> issues;
};

/// Parses and validates a JSON document. All problems are collected before
/// returning; unknown or inapplicable keys are errors.
ParsedConfig parse_config(const std::string& json_text);
ParsedConfig load_config(const std::string& path);

/// Semantic checks that need the catalog (e.g. the annealing threshold).
std::vector<ValidationIssue> validate(const ExperimentConfig& config);

/// Potential and schedule named by the config (k resolved against the threshold).
Potential build_potential(const PotentialSpec& spec);
Schedule build_schedule(const ExperimentConfig& config, const Potential& potential);

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace sidiff
