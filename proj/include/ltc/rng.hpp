#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>

namespace ltc {

// Purposes for independent random streams. Every consumer derives its own
// stream from (seed, purpose, keys...), so adding a consumer never shifts the
// draws seen by another.
enum class Stream : std::uint64_t {
  kSplit = 1,
  kSynthClass = 2,
  kSynthDoc = 3,
  kClassIndex = 4,
  kIbsShuffle = 5,
  kClassPick = 6,
  kClassCursor = 7,
  kEmbeddingInit = 8,
  kExtractorInit = 9,
  kHeadInit = 10,
  kNcmBatches = 11,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream purpose,
                                 std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  for (auto k : keys) h = splitmix64(h ^ k);
  return h;
}

// Portable generator: mt19937_64 has a standard-mandated output sequence, and
// the distribution helpers below avoid the implementation-defined std ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream purpose, std::initializer_list<std::uint64_t> keys = {})
      : engine_(derive_seed(seed, purpose, keys)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ltc
