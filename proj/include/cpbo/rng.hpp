#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string_view>

namespace cpbo {

// Stable 64-bit hash of a stream name, used to derive independent sub-streams.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// A named, seeded random stream. All randomness in a run is drawn from
// instances keyed by (run seed, stream name, extra indices) so that no stream
// depends on how much another one consumed.
//
// Uniform and normal variates are derived from the raw engine bits directly
// rather than through <random> distributions, whose algorithms are
// implementation-defined.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view name,
               std::initializer_list<std::uint64_t> extra = {}) {
    std::uint64_t h = fnv1a(name);
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h),
                      static_cast<std::uint32_t>(h >> 32)};
    engine_.seed(seq);
    for (std::uint64_t e : extra) {
      // Fold extra indices in by re-seeding from a mixed value.
      std::uint64_t v = engine_() ^ (e * 0x9E3779B97F4A7C15ULL);
      std::seed_seq s2{static_cast<std::uint32_t>(v),
                       static_cast<std::uint32_t>(v >> 32),
                       static_cast<std::uint32_t>(e),
                       static_cast<std::uint32_t>(e >> 32)};
      engine_.seed(s2);
    }
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cpbo
