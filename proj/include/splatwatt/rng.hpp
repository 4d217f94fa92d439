// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

#include "splatwatt/types.hpp"

namespace splatwatt {

// Deterministic generator with hand-rolled samplers. Standard-library
// distributions are implementation-defined, which would break bit-exact
// reproducibility of generated scenes and frozen test expectations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  // splitmix64
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller, one value per call (spare cached).
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = 0.0;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

  // Shoemake's uniform unit quaternion.
  Quat unit_quaternion() {
    const double u1 = next_double();
    const double u2 = next_double();
    const double u3 = next_double();
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    return Quat(a * std::sin(2.0 * M_PI * u2), a * std::cos(2.0 * M_PI * u2),
                b * std::sin(2.0 * M_PI * u3), b * std::cos(2.0 * M_PI * u3));
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace splatwatt
