#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace diffnet {

// SplitMix64 finalizer; also used to expand seeds into generator state.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  return mix64(state);
}

// xoshiro256** with a deterministic Gaussian generator on top. All
// randomness in the project flows through this type so that results are
// bit-reproducible across platforms and independent of the standard
// library's distribution implementations.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
    spare_valid_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (spare_valid_) {
      spare_valid_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    spare_valid_ = true;
    return u * m;
  }

  // Uniform integer in [0, n); n > 0. Unbiased (Lemire rejection).
  int uniform_int(int n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      const unsigned __int128 m = static_cast<unsigned __int128>(r) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold)
        return static_cast<int>(m >> 64);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_;
  bool spare_valid_ = false;
};

// Stream keyed by (seed, path...). The same key always yields the same draw
// sequence, so (seed, trial, iteration) addresses data independently of
// execution order or parallelism.
inline RngStream keyed_stream(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(seed ^ 0xD1B54A32D192ED03ULL);
  for (std::uint64_t p : path)
    s = mix64(s + 0x9E3779B97F4A7C15ULL * (p + 1));
  return RngStream(s);
}

}  // namespace diffnet
