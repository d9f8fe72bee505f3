#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace egoav {

// SplitMix64 step; used to derive sub-stream seeds and stable hashes.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Deterministic random stream. mt19937_64 output is pinned by the standard and
// the distributions below are implemented by hand, so draws are identical
// across platforms and toolchains (std::uniform_real_distribution is not).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed), origin_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    if (n <= 0) return 0;
    return static_cast<int>(uniform() * static_cast<double>(n));
  }

  // Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Child stream whose seed depends on this stream's creation seed and `salt`,
  // without consuming draws from this stream.
  RandomStream fork(std::uint64_t salt) const {
    return RandomStream(hash_combine(origin_, salt));
  }

 private:
  std::mt19937_64 gen_;
  std::uint64_t origin_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Spec-level entry point: identical seeds yield identical streams.
inline RandomStream seed_rng(std::uint64_t seed) {
  RandomStream s(seed);
  return s;
}

}  // namespace egoav
