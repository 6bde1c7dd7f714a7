#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sidiff/error.hpp"
#include "sidiff/gibbs.hpp"
#include "sidiff/rng.hpp"

using namespace sidiff;

TEST_SUITE("gibbs") {
  TEST_CASE("normalizers match mpmath quadrature") {
    // mp.quad at 40 digits (goldens/reference.json).
    const Potential dw = make_potential("double_well");
    CHECK(GibbsMeasure(dw, 0.2).normalizer() == doctest::Approx(0.5725340616789123).epsilon(1e-10));
    CHECK(GibbsMeasure(dw, 0.05).normalizer() == doctest::Approx(0.2816011608980407).epsilon(1e-10));
    CHECK(GibbsMeasure(dw, 0.01).normalizer() == doctest::Approx(0.12544956122973325).epsilon(1e-10));
    const Potential sp = make_potential("spline_twowell");
    CHECK(GibbsMeasure(sp, 0.01).normalizer() == doctest::Approx(0.181029399899263).epsilon(1e-9));
    const Potential mex = make_potential("mexican_2d");
    CHECK(GibbsMeasure(mex, 0.1).normalizer() == doctest::Approx(1.2451159920349866).epsilon(1e-8));
  }

  TEST_CASE("interval masses and the CDF") {
    const GibbsMeasure m(make_potential("double_well"), 0.2);
    CHECK(m.mass(0.5, 1.5) == doctest::Approx(0.4995348527217814).epsilon(1e-9));
    CHECK(m.mass(-10.0, 10.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
    for (double p : {0.01, 0.2, 0.5, 0.77, 0.99}) CHECK(m.cdf(m.quantile(p)) == doctest::Approx(p).epsilon(1e-6));
    CHECK(m.expect([](const Vec&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.tail_bound() < 1e-10);
  }

  TEST_CASE("confinement: V_a of the quadratic is Gaussian with variance eps^2 / (2 (1 + 2/a))") {
    const Potential q = make_potential("quadratic");
    for (double a : {0.5, 3.0, 40.0}) {
      const GibbsMeasure m(q, 0.7, a);
      CHECK(m.second_moment() == doctest::Approx(0.7 / (2.0 * (1.0 + 2.0 / a))).epsilon(1e-10));
    }
    CHECK_THROWS_AS(GibbsMeasure(q, 0.7, 0.0), DomainError);
    CHECK_THROWS_AS(GibbsMeasure(q, -1.0), DomainError);
  }

  TEST_CASE("the log normalizer stays finite where Z underflows") {
    const GibbsMeasure m(make_potential("double_well").shifted(50.0), 0.05);
    CHECK(std::isfinite(m.log_normalizer()));
    CHECK(m.log_normalizer() == doctest::Approx(std::log(0.2816011608980407) - 2000.0).epsilon(1e-12));
  }

  TEST_CASE("Laplace approximation") {
    const Potential dw = make_potential("double_well");
    const auto lap = laplace_approx(dw, 0.01);
    CHECK(lap.value == doctest::Approx(2.0 * std::sqrt(M_PI * 0.01 / 8.0)));
    CHECK(lap.min_value == doctest::Approx(0.0).epsilon(1e-14));
    // mpmath ratio Z / Laplace at eps^2 = 0.01.
    const double ratio = GibbsMeasure(dw, 0.01).normalizer() * std::exp(-lap.log_factor) / lap.value;
    CHECK(ratio == doctest::Approx(1.0009426806469788).epsilon(1e-8));
    CHECK_THROWS_AS(laplace_approx(make_potential("mexican_2d"), 0.01), UnsupportedError);
  }

  TEST_CASE("Hwang limit weights") {
    const auto dw = pi0(make_potential("double_well"));
    REQUIRE(dw.weights.size() == 2);
    CHECK(dw.weights[0] == doctest::Approx(0.5));
    const auto sp = pi0(make_potential("spline_twowell", {{"h_minus", 2.0}, {"h_plus", 8.0}, {"barrier", 1.0}}));
    REQUIRE(sp.weights.size() == 2);
    CHECK(sp.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(sp.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(sp.support[0][0] == doctest::Approx(-1.0));
  }

  TEST_CASE("gamma statistics") {
    const auto dw = gamma_stats(make_potential("double_well"));
    CHECK(std::abs(dw.mean) < 1e-12);
    CHECK(dw.second_moment == doctest::Approx(0.8521361521783343).epsilon(1e-10));
    const auto tw = gamma_stats(make_potential("tilted_well"));
    CHECK(tw.mean == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(tw.second_moment == doctest::Approx(1.5).epsilon(1e-10));
    CHECK_THROWS_AS(gamma_stats(make_potential("mexican_2d")), UnsupportedError);
  }

  TEST_CASE("inverse-CDF sampling reproduces interval masses") {
    const GibbsMeasure m(make_potential("double_well"), 0.2);
    RngStream rng(11, 0);
    const auto xs = gibbs_sample(m, rng, 200000);
    const double frac = static_cast<double>(std::count_if(xs.begin(), xs.end(),
                                                          [](double x) { return x >= 0.5 && x <= 1.5; })) /
                        static_cast<double>(xs.size());
    CHECK(std::abs(frac - 0.4995348527217814) < 5.0 * std::sqrt(0.25 / 200000.0));
    RngStream again(11, 0);
    CHECK(gibbs_sample(m, again, 5) == std::vector<double>(xs.begin(), xs.begin() + 5));
  }

  TEST_CASE("second moment stays bounded along an annealing schedule") {
    const auto report = second_moment_bound_check(make_potential("double_well"),
                                                  Schedule::logarithmic(12.5, std::exp(1.0)), 1.0,
                                                  {10.0, 100.0, 1000.0, 10000.0});
    CHECK(report.no_growth);
    CHECK(report.max_value < 2.0);
  }

  TEST_CASE("smooth bump") {
    CHECK(smooth_bump({1.0, 0.0}, {1.0, 0.0}, 0.5) == 1.0);
    CHECK(smooth_bump({1.2, 0.0}, {1.0, 0.0}, 0.5) == 1.0);
    CHECK(smooth_bump({1.5, 0.0}, {1.0, 0.0}, 0.5) == 0.0);
    const double mid = smooth_bump({1.375, 0.0}, {1.0, 0.0}, 0.5);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
  }
}
