#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace rstc {

/// The project-wide random stream: std::mt19937_64, whose raw output is fixed
/// by the C++ standard. Uniform, normal and index draws are derived here and
/// not through <random> distributions, whose algorithms differ between
/// standard libraries; this keeps every seeded result reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Box-Muller transform (pairs are cached).
  double normal();

  /// Uniform index in [0, n) without modulo bias. n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Deterministic stream for `seed`.
inline Rng seeded_rng(std::uint64_t seed) { return Rng(seed); }

/// Combines a base seed with a stream index (splitmix64 finalizer), so that
/// e.g. (seed, step) pairs get decorrelated streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace rstc
