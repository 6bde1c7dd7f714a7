#pragma once

#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace sidiff {

/// Counter-based random stream. Output number `n` of stream `(seed, index)` is
/// a pure function of the triple (seed, index, n): streams with different
/// indices use independently derived keys and Weyl increments, and a stream
/// can be replayed or forked at any counter value.
///
/// Satisfies UniformRandomBitGenerator so it can feed standard distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix(key_ + counter_ * gamma_);
  }

  /// Standard normal variate (ziggurat).
  double normal() { return normal_(*this); }

  /// Uniform variate in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t index() const { return index_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t key_;
  std::uint64_t gamma_;
  std::uint64_t counter_ = 0;
  boost::random::normal_distribution<double> normal_;
};

/// Stream indices reserved for non-path draws so they never collide with the
/// per-path indices 0..N-1 of an ensemble.
namespace stream_ids {
inline constexpr std::uint64_t kBootstrap = 0xB0075742ULL << 32;
inline constexpr std::uint64_t kHypotheses = 0x4859504FULL << 32;
inline constexpr std::uint64_t kInitialLaw = 0x494E4954ULL << 32;
}  // namespace stream_ids

}  // namespace sidiff
