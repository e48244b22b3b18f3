#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace simcal {

// Counter-based random stream. Every consumer derives its own stream from
// (root seed, domain tag, indices), so adding consumers or reordering
// evaluations never perturbs the numbers another stream sees.
//
// The generator is splitmix64 over a mixed 64-bit state; output quality is
// more than adequate for sampling and the implementation is identical on
// every platform, which keeps seeded runs byte-reproducible.
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  static RngStream derive(std::uint64_t seed, std::string_view domain,
                          std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the domain tag
    for (char c : domain) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    std::uint64_t s = mix(seed ^ h);
    s = mix(s ^ mix(a + 0x9e3779b97f4a7c15ull));
    s = mix(s ^ mix(b + 0x7f4a7c159e3779b9ull));
    return RngStream(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; pairs are cached, consumption order is
  // deterministic.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace simcal
