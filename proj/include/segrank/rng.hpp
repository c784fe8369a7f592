#pragma once

#include <cstdint>

namespace segrank {

// Counter-based splittable generator: the state for (seed, stream) is a pure
// function of both, so independent streams can be opened in any order and
// parallel consumers reproduce serial output bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : state_(mix(seed ^ 0x9e3779b97f4a7c15ull) ^
               mix(stream * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull)) {}

  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform integer in [0, n), n >= 1 (Lemire rejection).
  std::uint32_t bounded(std::uint32_t n) noexcept {
    std::uint64_t m = static_cast<std::uint64_t>(word32()) * n;
    auto low = static_cast<std::uint32_t>(m);
    if (low < n) {
      const std::uint32_t threshold = (0u - n) % n;
      while (low < threshold) {
        m = static_cast<std::uint64_t>(word32()) * n;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  // Uniform double in [0, 1).
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint32_t word32() noexcept { return static_cast<std::uint32_t>(next() >> 32); }

  std::uint64_t state_;
};

}  // namespace segrank
