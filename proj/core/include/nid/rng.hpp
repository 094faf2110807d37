#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nid {

/// Seeded generator with platform-independent draws.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The distribution helpers below are written out instead of using
/// std::uniform_*_distribution, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t index(std::uint64_t n) {
    // Rejection sampling on the top of the range to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child generator; stable for a given (parent seed, stream).
  Rng split(std::string_view stream) { return Rng(derive_seed(next_u64(), stream)); }

  /// splitmix64 finalizer over the seed mixed with an FNV-1a hash of the name.
  static std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by Rng::index.
template <typename Range>
void shuffle(Range& range, Rng& rng) {
  using std::swap;
  const auto n = static_cast<std::uint64_t>(std::size(range));
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.index(i);
    swap(range[i - 1], range[j]);
  }
}

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace nid
