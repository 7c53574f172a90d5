#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tsc {

// Counter-based pseudo-random generator. Each draw hashes (key, counter)
// through the SplitMix64 finalizer, so streams derived from the same master
// seed are independent and results are identical across platforms and
// standard-library implementations.
class Rng {
 public:
  Rng() : key_(0), counter_(0) {}
  explicit Rng(std::uint64_t key) : key_(key), counter_(0) {}

  // Derives a child stream key from (seed, stream role, index).
  static Rng derive(std::uint64_t master_seed, std::string_view role,
                    std::uint64_t index = 0) {
    std::uint64_t h = mix(master_seed ^ 0x6a09e667f3bcc909ULL);
    for (char c : role) h = mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    h = mix(h ^ index);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + 0x9e3779b97f4a7c15ULL * (++counter_);
    return mix(z);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Modulo bias is negligible for the small n used here.
    return n == 0 ? 0 : next_u64() % n;
  }

  // Poisson draw by Knuth multiplication for small means, normal
  // approximation with continuity correction above the cutoff.
  int next_poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      double limit = std::exp(-mean);
      double prod = next_double();
      int count = 0;
      while (prod > limit) {
        prod *= next_double();
        ++count;
      }
      return count;
    }
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double gauss = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(6.283185307179586476925287 * u2);
    double v = mean + std::sqrt(mean) * gauss + 0.5;
    return v < 0.0 ? 0 : static_cast<int>(v);
  }

  std::uint64_t counter() const { return counter_; }
  std::uint64_t key() const { return key_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace tsc
