#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace cabsim {

// splitmix64 finalizer (Stafford mix13). Used for seeding and stream derivation.
constexpr uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// xoshiro256++ with our own samplers. The standard library distributions are
// not bit-stable across implementations; experiment replay requires that all
// sampling be pinned down to this translation unit.
class RngStream {
 public:
  using result_type = uint64_t;

  explicit RngStream(uint64_t seed) {
    uint64_t z = seed;
    for (auto& word : state_) {
      z += 0x9e3779b97f4a7c15ULL;
      word = mix64(z);
    }
  }

  static constexpr uint64_t min() { return 0; }
  static constexpr uint64_t max() { return ~0ULL; }

  uint64_t operator()() { return next(); }

  uint64_t next() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1), 53 random bits
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1], safe as a log() argument
  double uniform01_open_left() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // index uniform on {0, ..., n-1}
  uint64_t uniform_index(uint64_t n) {
    return static_cast<uint64_t>(uniform01() * static_cast<double>(n)) % n;
  }

  // standard normal via Box-Muller; consumes exactly two words
  double normal() {
    const double u1 = uniform01_open_left();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 boosted through shape + 1
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform01_open_left();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01_open_left();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  static constexpr uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<uint64_t, 4> state_{};
};

// Deterministic substream derivation keyed by (master_seed, rep_index, tag).
// Distinct keys give independent streams; the mapping is part of the replay
// contract and must not change across versions.
inline uint64_t derive_stream_seed(uint64_t master_seed, uint64_t rep_index,
                                   std::string_view tag) {
  uint64_t z = mix64(master_seed + 0x9e3779b97f4a7c15ULL);
  z = mix64(z ^ (0xd1b54a32d192ed03ULL * (rep_index + 1)));
  z = mix64(z ^ fnv1a64(tag));
  return z;
}

inline RngStream derive_stream(uint64_t master_seed, uint64_t rep_index,
                               std::string_view tag) {
  return RngStream(derive_stream_seed(master_seed, rep_index, tag));
}

// Compact per-replication seed recorded in result rows.
inline uint64_t derive_rep_seed(uint64_t master_seed, uint64_t rep_index) {
  return mix64(mix64(master_seed) ^ (rep_index + 0x9e3779b97f4a7c15ULL));
}

}  // namespace cabsim
