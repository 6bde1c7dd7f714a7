#include "sidiff/rng.hpp"

namespace sidiff {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Weyl increments must be odd; also avoid increments with too few bit
// transitions, as in SplitMix's mixGamma.
std::uint64_t make_gamma(std::uint64_t z) {
  z = RngStream::mix(z) | 1ULL;
  const auto transitions = __builtin_popcountll(z ^ (z >> 1));
  return transitions < 24 ? z ^ 0xaaaaaaaaaaaaaaaaULL : z;
}
}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t index)
    : seed_(seed),
      index_(index),
      key_(mix(seed ^ mix(index + kGolden))),
      gamma_(make_gamma(mix(seed + kGolden) ^ (index * 0xd1342543de82ef95ULL + 1))) {}

}  // namespace sidiff
