#pragma once

#include <cstdint>
#include <limits>

namespace witsen {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Small counter-based engine (UniformRandomBitGenerator). Cheap to construct,
/// so every Monte Carlo sample gets its own stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Stream for sample `index` under `seed`; depends on nothing else, so results
/// do not change with thread count or evaluation order.
constexpr SplitMix64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(mix64(seed) ^ (index * 0xd1b54a32d192ed03ULL)));
}

}  // namespace witsen
