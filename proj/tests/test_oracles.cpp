#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "sidiff/gibbs.hpp"
#include "sidiff/oracles.hpp"

using namespace sidiff;

namespace {

nlohmann::json load(const std::string& name) {
  std::ifstream in(std::string(SIDIFF_GOLDENS_DIR) + "/" + name);
  REQUIRE(in);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_SUITE("oracles") {
  TEST_CASE("the oracle run reproduces the committed goldens") {
    const auto golden = load("oracles.json");
    const auto now = nlohmann::json::parse(run_oracles());
    REQUIRE(now.size() == golden.size());
    for (const auto& [key, value] : golden.items()) {
      INFO(key);
      REQUIRE(now.contains(key));
      if (value.is_array()) {
        REQUIRE(now[key].size() == value.size());
        for (std::size_t i = 0; i < value.size(); ++i)
          CHECK(now[key][i].get<double>() == doctest::Approx(value[i].get<double>()).epsilon(1e-12));
      } else {
        CHECK(now[key].get<double>() == doctest::Approx(value.get<double>()).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("brute-force oracles agree with the mpmath references") {
    const auto ref = load("reference.json");
    const auto ora = load("oracles.json");
    CHECK(ora["double_well_Z_eps2_0.05_trapezoid"].get<double>() ==
          doctest::Approx(ref["double_well_Z_eps2_0.05"].get<double>()).epsilon(1e-10));
    CHECK(ora["double_well_gamma_second_moment_trapezoid"].get<double>() ==
          doctest::Approx(ref["double_well_gamma_second_moment"].get<double>()).epsilon(1e-10));
    CHECK(ora["double_well_osc_chi_grid"].get<double>() ==
          doctest::Approx(ref["double_well_osc_chi"].get<double>()).epsilon(1e-7));
    CHECK(ora["spline_twowell_osc_chi_grid"].get<double>() ==
          doctest::Approx(ref["spline_twowell_osc_chi"].get<double>()).epsilon(1e-7));
    CHECK(ora["quadratic_centered_ode_y_at_5"].get<double>() ==
          doctest::Approx(ref["quadratic_centered_y_at_5"].get<double>()).epsilon(1e-12));
    CHECK(ora["quadratic_coupled_gap_at_5"].get<double>() ==
          doctest::Approx(ref["quadratic_coupled_gap_at_5"].get<double>()).epsilon(1e-12));
  }

  TEST_CASE("production quadrature agrees with the trapezoid oracle") {
    const Potential dw = make_potential("double_well");
    for (double eps2 : {0.5, 0.2, 0.05}) {
      const double trap = trapezoid_integral(dw, eps2, kInfiniteA, -3.0, 3.0, 200000);
      CHECK(GibbsMeasure(dw, eps2).normalizer() == doctest::Approx(trap).epsilon(1e-9));
    }
    const double trap_a = trapezoid_integral(dw, 0.3, 2.0, -3.0, 3.0, 200000);
    CHECK(GibbsMeasure(dw, 0.3, 2.0).normalizer() == doctest::Approx(trap_a).epsilon(1e-9));
  }

  TEST_CASE("interval oracle for the maximal height") {
    CHECK(interval_maximal_height_1d(make_potential("double_well")) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(interval_maximal_height_1d(make_potential("quadratic")) == 0.0);
    CHECK(interval_maximal_height_1d(make_potential("spline_twowell", {{"barrier", 2.5}})) ==
          doctest::Approx(2.5).epsilon(1e-12));
  }
}
