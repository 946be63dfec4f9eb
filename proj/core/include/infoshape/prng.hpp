#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace infoshape {

/// FNV-1a 64-bit hash. Used for substream key derivation and config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Deterministic PRNG built on SplitMix64 (Steele, Lea & Flood 2014): a 64-bit
/// state advanced by a fixed odd constant and scrambled by two xor-shift
/// multiplies. The same seed produces the same stream on every platform.
///
/// Substreams are derived by key derivation from (seed, purpose tag):
///   state0 = scramble(seed ^ fnv1a64(tag))          -- substream(seed, tag)
///   state0 = scramble(seed ^ fnv1a64(tag) ^ mix(i)) -- substream(seed, tag, i)
/// Distinct tags name statistically independent streams, so components can be
/// reordered or run concurrently without changing any result.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index);
  static Prng substream(std::uint64_t seed, std::string_view tag) {
    return Prng(derive_seed(seed, tag));
  }
  static Prng substream(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    return Prng(derive_seed(seed, tag, index));
  }

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();

  /// Uniform index in [0, n). Unbiased (rejection sampling).
  std::size_t uniform_index(std::size_t n);

  /// Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

  /// k indices from {0, ..., n-1}: without replacement when k <= n (partial
  /// Fisher-Yates), with replacement otherwise.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace infoshape
