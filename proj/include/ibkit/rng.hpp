#pragma once

#include <cstdint>

namespace ibkit {

// SplitMix64: the versioned generator behind every randomized fixture.
// All golden tests depend on this exact sequence, so the algorithm must
// never change without bumping the schema version of CLI outputs.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double strictly inside (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform double in (-1, 1).
  double symmetric() noexcept { return 2.0 * uniform() - 1.0; }

private:
  std::uint64_t state_;
};

// Derives an independent stream for a sub-task (restart index, sweep index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  SplitMix64 mix(seed ^ (0xd1342543de82ef95ULL * (salt + 1)));
  return mix.next();
}

}  // namespace ibkit
