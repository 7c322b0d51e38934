#ifndef HDA_RNG_HPP
#define HDA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hda {

// Deterministic random stream. std::mt19937_64 output is specified by the
// standard; the distribution transforms live here so sampled values are
// reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Poisson by inversion, chunked so exp(-mean) never underflows.
  long poisson(double mean) {
    long total = 0;
    while (mean > 0.0) {
      const double chunk = mean > 500.0 ? 500.0 : mean;
      mean -= chunk;
      const double limit = std::exp(-chunk);
      double p = 1.0;
      long k = -1;
      do {
        ++k;
        p *= 1.0 - uniform();  // avoid exact zero
      } while (p > limit);
      total += k;
    }
    return total;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Independent per-purpose stream derived from a base seed (splitmix64 step).
inline Rng derived_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return Rng(z ^ (z >> 31));
}

}  // namespace hda

#endif
