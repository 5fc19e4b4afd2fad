#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fluxreg {

/// Seeded generator; `for_task` derives an independent stream per parallel
/// task so results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed, 0, false); }
  static Rng for_task(std::uint64_t seed, std::uint64_t task) { return Rng(seed, task); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  std::uint64_t bits() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

  /// Unit vector, uniform on the sphere.
  void unit_vector(std::span<double> out);
  /// Flat Dirichlet draw: nonnegative entries summing to one.
  void simplex_point(std::span<double> out);

 private:
  Rng(std::uint64_t seed, std::uint64_t task) { reseed(seed, task, true); }
  void reseed(std::uint64_t seed, std::uint64_t task, bool split) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(task >> 32),
                      static_cast<std::uint32_t>(split)};
    engine_.seed(seq);
  }
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fluxreg
