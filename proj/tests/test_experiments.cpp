#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sidiff/config.hpp"
#include "sidiff/experiments.hpp"

using namespace sidiff;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sidiff_tests_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig must_parse(const std::string& text) {
  auto p = parse_config(text);
  REQUIRE(p.config);
  return *p.config;
}

std::map<std::string, std::string> read_csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

const char* kSmallAnneal = R"({
  "experiment": "anneal_to_pi0", "seed": 17,
  "potential": {"id": "double_well"},
  "schedule": {"family": "logarithmic", "k_threshold_multiple": 4},
  "z0": 0.0, "paths": 24, "horizon": 40, "dt": 0.002, "observe_every": 10
})";

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("landscape experiment passes and writes its artifacts") {
    auto c = must_parse(R"({"experiment": "landscape_spectrum", "seed": 1, "potential": {"id": "double_well"},
                            "schedule": {"k": 12.5}})");
    c.output_dir = scratch("landscape").string();
    const auto r = run_experiment(c);
    CHECK(r.all_pass());
    CHECK(r.find("maximal_height_matches_oracle") != nullptr);
    CHECK(r.find("jacquot_trend")->pass);
    CHECK(fs::exists(fs::path(c.output_dir) / "landscape.csv"));
    CHECK(fs::exists(fs::path(c.output_dir) / "spectrum.csv"));
    CHECK(fs::exists(fs::path(c.output_dir) / "verdict.json"));
  }

  TEST_CASE("verdict schema: every criterion id appears exactly once") {
    auto c = must_parse(kSmallAnneal);
    c.output_dir = scratch("schema").string();
    const auto r = run_experiment(c);
    const auto v = nlohmann::json::parse(verdict_json(c, r));
    for (const char* key : {"experiment", "version", "config_hash", "seed", "all_pass", "criteria", "diagnostics",
                            "warnings", "artifacts", "wall_clock_seconds"})
      CHECK(v.contains(key));
    CHECK(v["version"] == version());
    CHECK(v["config_hash"] == config_hash(c));
    std::set<std::string> ids;
    for (const auto& crit : v["criteria"]) {
      CHECK(ids.insert(crit["id"].get<std::string>()).second);
      CHECK(crit["pass"].is_boolean());
      CHECK(crit["measured"].is_object());
    }
    CHECK(ids.count("blowup_fraction") == 1);
    CHECK(ids.count("pinsker_all_checkpoints") == 1);
    CHECK(ids.count("basin_masses_match_pi0") == 1);
    CHECK(ids.count("occupation_tv_to_gibbs") == 1);
    for (const auto& a : v["artifacts"]) CHECK(fs::exists(fs::path(c.output_dir) / a.get<std::string>()));
  }

  TEST_CASE("reruns are byte-identical, whatever the worker count") {
    auto c = must_parse(kSmallAnneal);
    const fs::path first = scratch("rerun_a");
    const fs::path second = scratch("rerun_b");
    c.workers = 1;
    c.output_dir = first.string();
    run_experiment(c);
    c.workers = 3;
    c.output_dir = second.string();
    run_experiment(c);
    const auto a = read_csvs(first);
    const auto b = read_csvs(second);
    REQUIRE(a.size() >= 5);
    CHECK(a == b);
  }

  TEST_CASE("a different seed changes the trajectories") {
    auto c = must_parse(kSmallAnneal);
    c.output_dir = scratch("seed_a").string();
    run_experiment(c);
    auto d = must_parse(std::string(kSmallAnneal).replace(std::string(kSmallAnneal).find("17"), 2, "18"));
    d.output_dir = scratch("seed_b").string();
    run_experiment(d);
    CHECK(read_csvs(c.output_dir).at("trajectory_path0.csv") != read_csvs(d.output_dir).at("trajectory_path0.csv"));
  }

  TEST_CASE("constant-g experiment with the coupled pair") {
    auto c = must_parse(R"({"experiment": "constant_g_mean", "seed": 2, "potential": {"id": "double_well"},
                            "y0": 1.0, "z0": 1.0, "paths": 8, "horizon": 30, "dt": 0.002, "coupled": true})");
    c.output_dir = scratch("constant_g").string();
    const auto r = run_experiment(c);
    CHECK(r.find("mean_flattens") != nullptr);
    CHECK(r.find("mean_log_ratio") == nullptr);
    CHECK(r.find("coupled_gap_decay") != nullptr);
    const auto files = read_csvs(c.output_dir);
    for (const char* f : {"mu_bar.csv", "m_t.csv", "mu_over_log_t.csv", "gap2.csv"}) CHECK(files.count(f) == 1);
  }

  TEST_CASE("free-energy experiment counts decreases over checkpoints") {
    auto c = must_parse(R"({"experiment": "free_energy_decay", "seed": 5, "potential": {"id": "double_well"},
                            "schedule": {"k_threshold_multiple": 1.25, "shift": 150}, "z0": -1.0,
                            "paths": 2000, "horizon": 10, "dt": 0.002, "bins": 30})");
    c.output_dir = scratch("free_energy").string();
    const auto r = run_experiment(c);
    const auto* crit = r.find("free_energy_decreases");
    REQUIRE(crit != nullptr);
    CHECK(crit->measured.size() >= 3);
    CHECK(crit->pass);
  }

  TEST_CASE("freeze experiment with a super-critical k fails its verdict") {
    auto c = must_parse(R"({"experiment": "freeze_subcritical", "seed": 7, "potential": {"id": "double_well"},
                            "schedule": {"k_threshold_multiple": 4.0}, "z0": 0.9, "paths": 16, "horizon": 50,
                            "checkpoints": 2})");
    c.output_dir = scratch("freeze_fail").string();
    const auto r = run_experiment(c);
    CHECK_FALSE(r.all_pass());
    CHECK_FALSE(r.find("paths_frozen_in_start_basin")->pass);
  }
}
