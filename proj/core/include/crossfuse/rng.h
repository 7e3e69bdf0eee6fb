#ifndef CROSSFUSE_RNG_H_
#define CROSSFUSE_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace crossfuse {

// Seeded pseudo-random source. The raw 64-bit stream comes from
// std::mt19937_64, whose output sequence is fixed by the standard; all
// derived draws (uniform, index, shuffle) are computed here rather than via
// std:: distributions so sequences match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent generator keyed by (seed, stream), e.g. one per sample id.
  Rng Derive(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform on {0, ..., n-1}; n must be positive. Unbiased (rejection).
  std::size_t UniformIndex(std::size_t n);
  bool Bernoulli(double p) { return Uniform() < p; }
  // Standard normal via Box-Muller.
  double Normal();

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[UniformIndex(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to mix seeds and stream ids.
std::uint64_t MixBits(std::uint64_t x);

// Stable 64-bit FNV-1a hash.
std::uint64_t HashString(std::string_view s);

}  // namespace crossfuse

#endif  // CROSSFUSE_RNG_H_
