#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace aduwt {

/// Deterministic, platform-independent random source.
///
/// The engine is std::mt19937_64 seeded directly with the 64-bit seed; its
/// output sequence is pinned by the C++ standard. All distribution
/// transforms are implemented here rather than taken from <random> because
/// the standard does not pin those, and identical streams across platforms
/// and standard libraries are part of the reproducibility contract:
///   uniform01:      (next() >> 11) * 2^-53, in [0, 1)
///   normal:         Box-Muller on a uniform01 pair, second value cached
///   uniform_index:  rejection sampling on the top bits, bias-free
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller; u1 nudged away from 0 so log stays finite.
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform draw from {0, ..., n-1} without modulo bias.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t span = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span + 1) % span;
    std::uint64_t v = next_u64();
    while (v > limit) v = next_u64();
    return static_cast<std::size_t>(v % span);
  }

  /// Fisher-Yates shuffle, descending index order.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace aduwt
