#include <doctest.h>

#include <cmath>

#include "sidiff/error.hpp"
#include "sidiff/potential.hpp"
#include "sidiff/schedule.hpp"

using namespace sidiff;

TEST_SUITE("schedule") {
  TEST_CASE("constructors reject invalid coefficients") {
    CHECK_THROWS_AS(Schedule::constant(0.0), ConfigError);
    CHECK_THROWS_AS(Schedule::logarithmic(-1.0, std::exp(1.0)), ConfigError);
    CHECK_THROWS_AS(Schedule::logarithmic(1.0, 2.0), ConfigError);
    const Schedule s = Schedule::logarithmic(1.0, std::exp(1.0));
    CHECK_THROWS_AS(s.G(-1.0), DomainError);
    CHECK_THROWS_AS(s.G_inverse(-1.0), DomainError);
  }

  TEST_CASE("closed-form G matches quadrature") {
    // (e+3) log(e+3) - (e+3) by hand; the quadrature oracle agrees to 1e-12.
    const Schedule s = Schedule::logarithmic(1.0, std::exp(1.0));
    const double e3 = std::exp(1.0) + 3.0;
    CHECK(s.G(3.0) == doctest::Approx(e3 * std::log(e3) - e3).epsilon(1e-14));
    CHECK(s.G(3.0) == doctest::Approx(4.25250538734854).epsilon(1e-13));
    for (double t : {0.1, 1.0, 17.0, 250.0}) CHECK(s.G(t) == doctest::Approx(G_by_quadrature(s, t)).epsilon(1e-11));
  }

  TEST_CASE("G^-1 inverts G over many decades") {
    for (double k : {0.3, 1.0, 12.5}) {
      const Schedule s = Schedule::logarithmic(k, std::exp(1.0));
      double prev = -1.0;
      for (double u = 1e-3; u < 1e7; u *= 3.7) {
        const double t = s.G_inverse(u);
        CHECK(t > prev);
        prev = t;
        CHECK(s.G(t) == doctest::Approx(u).epsilon(1e-10));
        CHECK(t == doctest::Approx(g_inverse_by_bisection(s, u, 1e-12)).epsilon(1e-9));
      }
    }
    CHECK(Schedule::logarithmic(2.0, std::exp(1.0)).G_inverse(0.0) == 0.0);
  }

  TEST_CASE("annealing state matches the mpmath root-finder") {
    // inner time, eps^2 and a for k = 12.5, shift e, r = 1 (goldens/reference.json).
    struct Row {
      double t, u, eps2, a;
    };
    const Row rows[] = {
        {10, 41.939919177008285, 3.2903066828484904, 13.05043064856017},
        {100, 268.78605066430055, 2.2305583255219847, 120.95000950094703},
        {1000, 1904.6633275412323, 1.6548648993662782, 1151.5522072351623},
        {10000, 14555.962588138966, 1.303992770210793, 11163.376761502906},
    };
    const Schedule s = Schedule::logarithmic(12.5, std::exp(1.0));
    for (const auto& r : rows) {
      const auto st = annealing_state(s, 1.0, r.t);
      CHECK(st.inner_time == doctest::Approx(r.u).epsilon(1e-10));
      CHECK(st.eps2 == doctest::Approx(r.eps2).epsilon(1e-12));
      CHECK(st.a == doctest::Approx(r.a).epsilon(1e-10));
    }
  }

  TEST_CASE("temperature decreases and a grows along the schedule") {
    const Schedule s = Schedule::logarithmic(3.0, std::exp(1.0));
    double eps2 = INFINITY;
    double a = 0.0;
    for (double t = 0.5; t < 1e6; t *= 2.0) {
      const auto st = annealing_state(s, 1.0, t);
      CHECK(st.eps2 < eps2);
      CHECK(st.a > a);
      eps2 = st.eps2;
      a = st.a;
    }
  }

  TEST_CASE("eps^2 log t approaches k slowly") {
    // eps^2(t) log t / k at t = 1e6 is 1.2048, not within 2%: the approach is
    // logarithmic, with G^-1(t) ~ k t / log t.
    const Schedule s = Schedule::logarithmic(1.0, std::exp(1.0));
    const double r6 = annealing_state(s, 1.0, 1e6).eps2 * std::log(1e6);
    const double r12 = annealing_state(s, 1.0, 1e12).eps2 * std::log(1e12);
    CHECK(r6 == doctest::Approx(1.2048).epsilon(1e-3));
    CHECK(std::abs(r12 - 1.0) < std::abs(r6 - 1.0));
    CHECK(*s.k_effective() == 1.0);
  }

  TEST_CASE("constant family") {
    const Schedule s = Schedule::constant(2.0);
    CHECK(s.G(3.0) == doctest::Approx(6.0));
    CHECK(s.G_inverse(6.0) == doctest::Approx(3.0));
    CHECK_FALSE(s.k_effective().has_value());
    CHECK(threshold_check(s, make_potential("double_well")).verdict == ThresholdVerdict::constant_g_regime);
  }

  TEST_CASE("threshold check compares k with max(2 osc, d/4)") {
    const Potential p = make_potential("double_well");
    const auto above = threshold_check(Schedule::logarithmic(12.5, std::exp(1.0)), p);
    CHECK(above.verdict == ThresholdVerdict::converges_to_global_minima);
    CHECK(above.threshold == doctest::Approx(3.125).epsilon(1e-9));
    CHECK(above.d_over_4 == 0.25);
    const auto below = threshold_check(Schedule::logarithmic(0.3125, std::exp(1.0)), p);
    CHECK(below.verdict == ThresholdVerdict::may_freeze);
    // Convex potentials: only d/4 matters.
    const auto quad = threshold_check(Schedule::logarithmic(0.3, std::exp(1.0)), make_potential("quadratic"));
    CHECK(quad.threshold == 0.25);
    CHECK(quad.verdict == ThresholdVerdict::converges_to_global_minima);
  }

  TEST_CASE("LSI constant and its saturation") {
    AnnealingState st;
    st.eps2 = 1.0;
    const auto c = lsi_constant(st, 1.5625, 1.0);
    CHECK(c.value == doctest::Approx(2.0 * std::exp(3.125)));
    CHECK_FALSE(c.saturated);
    st.eps2 = 1e-3;
    const auto sat = lsi_constant(st, 1.5625, 1.0);
    CHECK(sat.saturated);
    CHECK(std::isinf(sat.value));
    CHECK_THROWS_AS(lsi_constant(st, 1.0, 0.0), DomainError);
  }
}
