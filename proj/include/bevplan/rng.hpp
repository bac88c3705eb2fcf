// Self-contained deterministic RNG (splitmix64). std:: distributions are
// implementation-defined, so all randomness in the library and the synthetic
// generators goes through this to keep outputs reproducible byte-for-byte.
#pragma once

#include <cstdint>
#include <string_view>

#include "bevplan/types.hpp"

namespace bevplan {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  Scalar uniform() { return static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53; }

  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive on both ends.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  bool bernoulli(Scalar p) { return uniform() < p; }

  // Box-Muller; one fresh draw per call.
  Scalar normal() {
    Scalar u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const Scalar u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t state_;
};

// FNV-1a, used to derive per-name parameter seeds and per-scenario streams.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace bevplan
