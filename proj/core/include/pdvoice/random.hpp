#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace pdvoice {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for a named stream of a parent seed. Distinct tags give
/// statistically independent streams.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream_tag) noexcept;

/// Seeded generator whose draws are bit-identical across standard
/// libraries: the engine is mt19937_64 (fully specified) and the
/// distributions below are implemented here rather than taken from
/// <random>, whose distribution algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, bound), bound > 0, rejection-sampled (no modulo bias).
  std::size_t uniform_index(std::size_t bound);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Standard normal via Box-Muller (used for synthetic data only).
  double normal();
  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pdvoice
