#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "sidiff/error.hpp"
#include "sidiff/gibbs.hpp"
#include "sidiff/landscape.hpp"
#include "sidiff/oracles.hpp"

using namespace sidiff;

namespace {

// All-pairs minimax node value by Floyd-Warshall, on a small grid.
std::vector<std::vector<double>> minimax_closure(const GridGraph& g) {
  const std::size_t n = g.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> B(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    B[i][i] = g.value(i);
    g.for_each_neighbor(i, [&](std::size_t j) { B[i][j] = std::max(g.value(i), g.value(j)); });
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) B[i][j] = std::min(B[i][j], std::max(B[i][k], B[k][j]));
  return B;
}

}  // namespace

TEST_SUITE("landscape") {
  TEST_CASE("grid nodes sit on multiples of h and the origin is a node") {
    const GridGraph g(make_potential("double_well"), kInfiniteA, {{-1.5, 0.0}, {1.5, 0.0}}, 0.1);
    const std::size_t o = g.nearest({0.0, 0.0});
    CHECK(g.position(o)[0] == 0.0);
    CHECK(g.value(g.nearest({1.0, 0.0})) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(g.global_min_nodes().size() == 2);
    CHECK(g.adjacent(o, o + 1));
    CHECK_FALSE(g.adjacent(o, o + 2));
    CHECK_THROWS_AS(GridGraph(make_potential("mexican_2d"), kInfiniteA, {{-2.0, -2.0}, {2.0, 2.0}}, 1e-4),
                    ResolutionError);
  }

  TEST_CASE("bottleneck sweep agrees with the Floyd-Warshall minimax closure") {
    for (const char* id : {"mexican_2d", "double_well"}) {
      const Potential p = make_potential(id);
      const GridGraph g(p, 6.0, landscape_region(p), p.dimension() == 2 ? 0.3 : 0.05);
      REQUIRE(g.size() < 700);
      const auto B = minimax_closure(g);
      for (std::size_t src : {std::size_t{0}, g.size() / 2, g.size() - 1}) {
        const auto H = bottleneck_heights(g, {src});
        for (std::size_t j = 0; j < g.size(); ++j) CHECK(H[j] == doctest::Approx(B[src][j]).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("minimax height across the double-well barrier") {
    const Potential p = make_potential("double_well");
    const GridGraph g(p, kInfiniteA, landscape_region(p), 1e-3);
    CHECK(minimax_height(g, {-1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(minimax_height(g, {0.5, 0.0}, {1.0, 0.0}) == doctest::Approx(p.value({0.5, 0.0})).epsilon(1e-5));
    std::vector<std::size_t> path;
    for (std::size_t i = g.nearest({-1.0, 0.0}); i <= g.nearest({1.0, 0.0}); ++i) path.push_back(i);
    CHECK(path_energy(g, path) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("maximal height: zero for convex, the barrier for the double well") {
    const auto q = maximal_height(make_potential("quadratic"), kInfiniteA, 1e-3);
    CHECK(q.m == 0.0);
    const auto dw = maximal_height(make_potential("double_well"), kInfiniteA, 1e-3);
    CHECK(dw.m == doctest::Approx(1.0).epsilon(0.01));
    CHECK(dw.m == doctest::Approx(interval_maximal_height_1d(make_potential("double_well"))).epsilon(0.01));
    CHECK(dw.global_min_nodes == 2);
    CHECK(dw.z0_spread <= 1e-9);
    CHECK_FALSE(dw.refinement_warning);
    const auto sp = maximal_height(make_potential("spline_twowell"), kInfiniteA, 1e-3);
    CHECK(sp.m == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("finite a: |m(t) - m| a(t) stays bounded") {
    const auto report = landscape_report(make_potential("double_well"), Schedule::logarithmic(12.5, std::exp(1.0)),
                                         1.0, {10.0, 100.0, 1000.0, 10000.0}, 1e-3);
    CHECK(report.m_infinity == doctest::Approx(1.0).epsilon(0.01));
    REQUIRE(report.rows.size() == 4);
    CHECK(report.bound_stable);
    CHECK(report.fitted_C == doctest::Approx(1.0).epsilon(0.02));
    for (std::size_t i = 1; i < 4; ++i) CHECK(report.rows[i].a > report.rows[i - 1].a);
    std::ostringstream s;
    write_landscape_csv(s, report);
    CHECK(s.str().rfind("t,m_t,a_t,bound_C_over_a\n", 0) == 0);
  }

  TEST_CASE("Sturm bisection on the discrete Laplacian") {
    const std::size_t n = 50;
    const std::vector<double> diag(n, 2.0);
    const std::vector<double> off(n - 1, -1.0);
    for (std::size_t k = 0; k < 5; ++k) {
      const double exact = 2.0 - 2.0 * std::cos(static_cast<double>(k + 1) * M_PI / static_cast<double>(n + 1));
      CHECK(tridiagonal_eigenvalue(diag, off, k) == doctest::Approx(exact).epsilon(1e-11));
    }
    CHECK(sturm_count(diag, off, 0.0) == 0);
    CHECK(sturm_count(diag, off, 4.0) == n);
    CHECK(sturm_count(diag, off, 2.0 - 2.0 * std::cos(3.5 * M_PI / 51.0)) == 3);
  }

  TEST_CASE("generator spectrum agrees with a dense Eigen eigensolver") {
    // Builds the unsymmetrized rate matrix from the grid values and compares
    // its two smallest eigenvalues with the Sturm bisection on the
    // symmetrized tridiagonal form.
    const Potential p = make_potential("double_well");
    const double eps2 = 0.5;
    const double h = 0.02;
    const SearchBox box{{-2.0, 0.0}, {2.0, 0.0}};
    const GridGraph g(p, kInfiniteA, box, h);
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    const double scale = eps2 / (2.0 * h * h);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double dv = g.value(static_cast<std::size_t>(i + 1)) - g.value(static_cast<std::size_t>(i));
      const double up = scale * std::exp(-dv / eps2);
      const double down = scale * std::exp(dv / eps2);
      L(i, i + 1) -= up;
      L(i, i) += up;
      L(i + 1, i) -= down;
      L(i + 1, i + 1) += down;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(L, false);
    std::vector<double> ev;
    for (Eigen::Index i = 0; i < n; ++i) ev.push_back(solver.eigenvalues()[i].real());
    std::sort(ev.begin(), ev.end());
    const auto s = generator_spectrum_1d(p, eps2, kInfiniteA, h, box);
    CHECK(std::abs(s.lambda1 - ev[0]) < 1e-9);
    CHECK(s.lambda2 == doctest::Approx(ev[1]).epsilon(1e-8));
    CHECK(s.lambda1_ok);
  }

  TEST_CASE("OU gap equals the Hessian at the minimum") {
    const auto s = generator_spectrum_1d(make_potential("quadratic"), 1.0, kInfiniteA, 1e-3);
    CHECK(s.lambda2 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s.lambda2 == doctest::Approx(0.99999975).epsilon(1e-6));
  }

  TEST_CASE("-eps^2 log lambda2 rises toward 2m on the double well") {
    const Potential p = make_potential("double_well");
    double prev = 0.0;
    for (double eps2 : {0.5, 0.33, 0.25, 0.2}) {
      const auto s = generator_spectrum_1d(p, eps2, kInfiniteA, 0.05 * std::sqrt(eps2));
      const double v = -eps2 * std::log(s.lambda2);
      CHECK(v > prev);
      prev = v;
    }
    CHECK(prev == doctest::Approx(2.0).epsilon(0.25));
    CHECK(prev == doctest::Approx(1.890).epsilon(1e-3));
  }

  TEST_CASE("spectrum resolution guard") {
    CHECK_THROWS_AS(generator_spectrum_1d(make_potential("double_well"), 0.25, kInfiniteA, 0.1), ResolutionError);
    CHECK_THROWS_AS(generator_spectrum_1d(make_potential("mexican_2d"), 0.25, kInfiniteA, 0.01), UnsupportedError);
  }
}
