#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "curvespec/angles.hpp"

namespace curvespec {

// Generator identifier recorded in every artifact that consumed randomness.
// mt19937_64 seeding and output are fixed by the C++ standard and the normal
// deviates come from an explicit Box-Muller transform, so streams are
// bit-reproducible across standard libraries.
inline constexpr const char* kGeneratorName = "mt19937_64+boxmuller/1";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // N(0, sigma^2) via Box-Muller; the paired deviate is cached.
  double normal(double sigma) {
    if (have_spare_) {
      have_spare_ = false;
      return sigma * spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return sigma * r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Seed splitting rule: one SplitMix64 round applied to
// base + (index + 1) * golden-ratio increment.  Streams for distinct indices
// are independent for practical purposes and the derivation is documented so
// concurrent consumers (replications, per-contour noise) can reproduce it.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace curvespec
