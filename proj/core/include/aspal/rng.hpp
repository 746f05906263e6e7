#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace aspal {

// SplitMix64 (Steele/Lea/Vigna): the k-th output is a bijective hash of
// seed + k*0x9e3779b97f4a7c15, i.e. a counter-based generator. Every consumer
// in this library documents its draw order against this generator, so a
// (seed, draw-order) pair pins the generated data bit-for-bit on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1): top 53 bits scaled by 2^-53.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Standard normal via Box-Muller; consumes exactly two uniform draws.
  double gaussian() {
    double u1 = 1.0 - uniform01();  // in (0, 1], keeps the log finite
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace aspal
