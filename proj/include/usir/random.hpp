#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace usir {

/// Deterministic stream of standard-normal doubles.
///
/// Construction is pinned so that a (seed, draw index) pair always yields the
/// same value on a given platform: a std::mt19937_64 engine feeds uniform
/// doubles u = (x >> 11) * 2^-53, and pairs of normals come from the
/// Box-Muller transform
///   z0 = sqrt(-2 ln(1 - u1)) * cos(2*pi*u2)
///   z1 = sqrt(-2 ln(1 - u1)) * sin(2*pi*u2)
/// (1 - u1 lies in (0, 1], so the log argument never vanishes).
/// See docs/formats.md for the reproducibility notes.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  void fill(std::span<double> out) {
    for (double& x : out)
      x = next();
  }

  /// Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Derive an independent child seed from a base seed and a tag. Used to
  /// give every worker / sample / cell its own stream.
  static std::uint64_t derive(std::uint64_t base, std::uint64_t tag) {
    return splitmix64(splitmix64(base) ^ splitmix64(~tag));
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace usir
