#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace pcf {

/// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Purposes for which seeds are derived from a single run seed.
enum class SeedStream : std::uint64_t {
  init = 1,
  shuffle = 2,
  user = 3,
  trial = 4,
  sampling = 5,
  split = 6,
};

/// Deterministic child seed for (base, purpose, index).
constexpr std::uint64_t derive_seed(std::uint64_t base, SeedStream stream, std::uint64_t index = 0) noexcept {
  return mix64(mix64(base ^ mix64(static_cast<std::uint64_t>(stream))) + index);
}

/// FNV-1a over the bytes of `s`; stable identifier hashing for per-user seeds.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seeded generator with platform-stable derived distributions.
///
/// std::mt19937_64 output is fixed by the standard, but the standard
/// distributions are not, so the uniform and integer draws are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Seeded Fisher-Yates permutation of `examples`.
template <class T>
std::vector<T> shuffle_examples(std::vector<T> examples, std::uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(std::span<T>(examples));
  return examples;
}

}  // namespace pcf
