#pragma once

// Seeded random streams. A run owns a single Rng; replicate streams are
// derived from a root seed by hashing (root, replicate, role).

#include <cstdint>
#include <random>

namespace vpp {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Stream roles; part of the seed derivation contract.
enum class StreamRole : std::uint64_t {
  dynamics = 1,
  placement = 2,
  statistics = 3,
  aipp = 4,
  tuning = 5,
};

inline constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t replicate,
                                           StreamRole role) {
  std::uint64_t h = splitmix64(root);
  h = splitmix64(h ^ (replicate * 0xD6E8FEB86659FD93ull));
  h = splitmix64(h ^ static_cast<std::uint64_t>(role));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw exactly uniform.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::mt19937_64& engine() { return engine_; }
  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vpp
