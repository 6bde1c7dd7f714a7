#include <doctest.h>

#include <algorithm>
#include <string>

#include "sidiff/config.hpp"

using namespace sidiff;

namespace {

bool has_issue(const ParsedConfig& p, const std::string& key, ValidationIssue::Severity severity) {
  return std::any_of(p.issues.begin(), p.issues.end(),
                     [&](const ValidationIssue& i) { return i.key == key && i.severity == severity; });
}

std::size_t errors(const ParsedConfig& p) {
  return static_cast<std::size_t>(std::count_if(p.issues.begin(), p.issues.end(), [](const ValidationIssue& i) {
    return i.severity == ValidationIssue::Severity::error;
  }));
}

constexpr auto kError = ValidationIssue::Severity::error;
constexpr auto kWarning = ValidationIssue::Severity::warning;

const char* kAnneal = R"({
  "experiment": "anneal_to_pi0", "seed": 3,
  "potential": {"id": "double_well"},
  "schedule": {"family": "logarithmic", "k": 12.5}
})";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("shipped configs are valid") {
    for (const char* name : {"anneal_to_pi0", "freeze_subcritical", "free_energy_decay", "constant_g_tilted",
                             "constant_g_double_well", "landscape_spectrum"}) {
      const auto p = load_config(std::string(SIDIFF_CONFIGS_DIR) + "/" + name + ".json");
      INFO(name);
      CHECK(p.config.has_value());
      CHECK(errors(p) == 0);
    }
  }

  TEST_CASE("defaults") {
    const auto p = parse_config(kAnneal);
    REQUIRE(p.config);
    const auto& c = *p.config;
    CHECK(c.kind == ExperimentKind::anneal_to_pi0);
    CHECK(c.seed == 3);
    CHECK(c.paths == 256);
    CHECK(c.dt == 1e-3);
    CHECK(c.horizon == 1e4);
    CHECK(c.r == 1.0);
    CHECK(c.output_dir == "out");
    CHECK(c.thresholds.basin_tolerance == 0.08);
    CHECK(c.thresholds.pinsker_slack == 0.01);
  }

  TEST_CASE("missing potential id is an error") {
    const auto p = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1, "potential": {},
                                    "schedule": {"k": 12.5}})");
    CHECK_FALSE(p.config);
    CHECK(has_issue(p, "potential.id", kError));
  }

  TEST_CASE("dt at or above the horizon is an error") {
    const auto p = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1, "potential": {"id": "double_well"},
                                    "schedule": {"k": 12.5}, "horizon": 1.0, "dt": 1.0})");
    CHECK_FALSE(p.config);
    CHECK(has_issue(p, "dt", kError));
  }

  TEST_CASE("unknown and inapplicable keys are errors") {
    const auto typo = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1, "potential": {"id": "double_well"},
                                       "schedule": {"k": 12.5}, "horizn": 10})");
    CHECK(has_issue(typo, "horizn", kError));
    const auto param = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1,
                                        "potential": {"id": "double_well", "params": {"depth": 2}},
                                        "schedule": {"k": 12.5}})");
    CHECK(has_issue(param, "potential", kError));
    const auto coupled = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1, "potential": {"id": "double_well"},
                                          "schedule": {"k": 12.5}, "coupled": true})");
    CHECK(has_issue(coupled, "coupled", kError));
  }

  TEST_CASE("all errors are collected before returning") {
    const auto p = parse_config(R"({"experiment": "anneal_to_pi0", "potential": {"id": 4},
                                    "schedule": {"k": -1}, "dt": -1, "paths": 0, "bins": 1, "extra": 1})");
    CHECK(has_issue(p, "seed", kError));
    CHECK(has_issue(p, "potential.id", kError));
    CHECK(has_issue(p, "schedule.k", kError));
    CHECK(has_issue(p, "dt", kError));
    CHECK(has_issue(p, "paths", kError));
    CHECK(has_issue(p, "bins", kError));
    CHECK(has_issue(p, "extra", kError));
    CHECK(errors(p) >= 7);
  }

  TEST_CASE("malformed JSON is reported, not thrown") {
    const auto p = parse_config("{\"experiment\": ");
    CHECK_FALSE(p.config);
    CHECK(errors(p) == 1);
    CHECK_FALSE(load_config("/nonexistent/config.json").config);
  }

  TEST_CASE("k below the threshold warns for converging experiments") {
    const auto p = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1, "potential": {"id": "double_well"},
                                    "schedule": {"k": 1.0}})");
    REQUIRE(p.config);
    CHECK(has_issue(p, "schedule.k", kWarning));
    const auto& msg = p.issues.front().message;
    CHECK(msg.find("3.125") != std::string::npos);
    const auto freeze = parse_config(R"({"experiment": "freeze_subcritical", "seed": 1, "z0": 0.9,
                                         "potential": {"id": "double_well"}, "schedule": {"k": 0.3}})");
    REQUIRE(freeze.config);
    CHECK(freeze.issues.empty());
  }

  TEST_CASE("k_threshold_multiple resolves against the threshold") {
    const auto p = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1, "potential": {"id": "double_well"},
                                    "schedule": {"k_threshold_multiple": 4}})");
    REQUIRE(p.config);
    const Potential pot = build_potential(p.config->potential);
    CHECK(build_schedule(*p.config, pot).k() == doctest::Approx(12.5).epsilon(1e-9));
    const auto both = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1, "potential": {"id": "double_well"},
                                       "schedule": {"k": 1, "k_threshold_multiple": 4}})");
    CHECK(has_issue(both, "schedule", kError));
  }

  TEST_CASE("2D potentials only run the landscape experiment") {
    const auto p = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 1, "potential": {"id": "mexican_2d"},
                                    "schedule": {"k": 12.5}})");
    CHECK(has_issue(p, "potential", kError));
  }

  TEST_CASE("config hash ignores key order and whitespace but not values") {
    const auto a = parse_config(kAnneal);
    const auto b = parse_config(R"({"schedule": {"k": 12.5, "family": "logarithmic"},
      "potential": {"id": "double_well"}, "seed": 3, "experiment": "anneal_to_pi0"})");
    const auto c = parse_config(R"({"experiment": "anneal_to_pi0", "seed": 4,
      "potential": {"id": "double_well"}, "schedule": {"family": "logarithmic", "k": 12.5}})");
    REQUIRE(a.config);
    REQUIRE(b.config);
    REQUIRE(c.config);
    CHECK(config_hash(*a.config) == config_hash(*b.config));
    CHECK(config_hash(*a.config) != config_hash(*c.config));
    CHECK(config_hash(*a.config).size() == 16);
  }
}
