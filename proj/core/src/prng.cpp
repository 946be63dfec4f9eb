#include "infoshape/prng.hpp"

#include <cmath>
#include <numeric>

#include "infoshape/error.hpp"

namespace infoshape {

namespace {

constexpr std::uint64_t kSplitMixGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t scramble(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Prng::derive_seed(std::uint64_t seed, std::string_view tag) {
  return scramble(seed ^ fnv1a64(tag));
}

std::uint64_t Prng::derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  return scramble(seed ^ fnv1a64(tag) ^ scramble((index + 1) * kSplitMixGamma));
}

std::uint64_t Prng::next_u64() {
  state_ += kSplitMixGamma;
  return scramble(state_);
}

double Prng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Prng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Prng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::size_t Prng::uniform_index(std::size_t n) {
  if (n == 0) throw UsageError("uniform_index: n must be positive");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod n
  std::uint64_t x = next_u64();
  while (x < threshold) x = next_u64();
  return static_cast<std::size_t>(x % bound);
}

std::vector<std::size_t> Prng::permutation(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  shuffle(idx);
  return idx;
}

std::vector<std::size_t> Prng::sample_indices(std::size_t n, std::size_t k) {
  if (n == 0) throw UsageError("sample_indices: population must be non-empty");
  if (k <= n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots end up with a uniform sample.
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + uniform_index(n - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }
  std::vector<std::size_t> idx(k);
  for (auto& v : idx) v = uniform_index(n);
  return idx;
}

}  // namespace infoshape
