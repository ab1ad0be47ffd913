#pragma once

#include <cmath>
#include <cstdint>

namespace codesign {

// Small self-contained generator (splitmix64) so that seeded runs are
// bit-identical across platforms and standard-library versions.
class Rng64 {
 public:
  explicit Rng64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inclusive integer range.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  // Standard normal via Box-Muller; draws two uniforms per call.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Derives an independent stream from a tuple of words, for per-episode
  // streams that do not depend on evaluation order.
  static uint64_t mix(uint64_t a, uint64_t b, uint64_t c = 0) {
    Rng64 h(a * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
    uint64_t x = h.next_u64() ^ (b + 0xbb67ae8584caa73bULL);
    Rng64 h2(x);
    return h2.next_u64() ^ (c * 0x3c6ef372fe94f82bULL + 1);
  }

 private:
  uint64_t state_;
};

}  // namespace codesign
