#include <doctest.h>

#include <cmath>
#include <vector>

#include "sidiff/rng.hpp"

using sidiff::RngStream;

TEST_SUITE("rng") {
  TEST_CASE("a stream is a pure function of seed, index and counter") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 1000; ++i) CHECK(a() == b());
    CHECK(a.counter() == 1000);
  }

  TEST_CASE("streams with different indices or seeds differ") {
    RngStream a(42, 0);
    RngStream b(42, 1);
    RngStream c(43, 0);
    int same_ab = 0;
    int same_ac = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto x = a();
      same_ab += x == b();
      same_ac += x == c();
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
  }

  TEST_CASE("reserved stream ids stay clear of path indices") {
    CHECK(sidiff::stream_ids::kBootstrap > (std::uint64_t{1} << 32));
    CHECK(sidiff::stream_ids::kHypotheses != sidiff::stream_ids::kBootstrap);
    CHECK(sidiff::stream_ids::kInitialLaw != sidiff::stream_ids::kHypotheses);
  }

  TEST_CASE("uniform and normal moments") {
    RngStream rng(2024, 3);
    const int n = 200000;
    double su = 0.0;
    double sn = 0.0;
    double sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      su += u;
      const double z = rng.normal();
      sn += z;
      sn2 += z * z;
    }
    // Five standard errors.
    CHECK(std::abs(su / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sn / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  }

  TEST_CASE("output is frozen across builds") {
    // Regression values: changing the generator changes every emitted number.
    RngStream rng(1, 0);
    const std::uint64_t first = rng();
    RngStream again(1, 0);
    CHECK(first == again());
    CHECK(RngStream::mix(0) == 0);
    CHECK(RngStream::mix(1) == 0x5692161d100b05e5ULL);
  }
}
