#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sidiff/config.hpp"

namespace sidiff {

const char* version();

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::vector<std::pair<std::string, double>> measured;
  std::string detail;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::anneal_to_pi0;
  std::vector<CriterionResult> criteria;
  /// Informational values that gate nothing.
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts;  ///< file names inside the output directory
  std::string config_hash;
  double wall_clock_seconds = 0.0;

  bool all_pass() const;
  const CriterionResult* find(const std::string& id) const;
};

/// Runs the pipeline named by the config, writes its CSV artifacts and
/// verdict.json into config.output_dir, and returns the verdicts. Every
/// emitted number is a pure function of the config (including the seed);
/// only the wall-clock field of verdict.json varies between reruns.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// verdict.json content.
std::string verdict_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace sidiff
