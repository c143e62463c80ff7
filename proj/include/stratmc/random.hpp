#pragma once

#include <cmath>
#include <cstdint>

namespace stratmc {

// 64-bit avalanche finalizer (SplitMix64 style). Also used to key streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Names an independent substream: one per (stratum, iteration) pair.
struct StreamId {
  std::uint64_t stratum = 0;
  std::uint64_t iteration = 0;
};

// Counter-based generator. The whole sequence is a pure function of
// (seed, stream id), so strata can be sampled in any order, or
// concurrently, without changing the values each stream produces.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, StreamId stream) noexcept
      : state_(derive(seed, stream)) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform in [0, 1).
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard exponential via inversion.
  double next_exponential() noexcept { return -std::log1p(-next_unit()); }

 private:
  static constexpr std::uint64_t derive(std::uint64_t seed,
                                        StreamId stream) noexcept {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull);
    h = mix64(h ^ mix64(stream.stratum + 0xbf58476d1ce4e5b9ull));
    h = mix64(h ^ mix64(stream.iteration + 0x94d049bb133111ebull));
    return h;
  }

  std::uint64_t state_;
};

}  // namespace stratmc
