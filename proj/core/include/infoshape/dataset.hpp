#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "infoshape/matrix.hpp"
#include "infoshape/prng.hpp"

namespace infoshape {

/// Feature matrix plus per-sample public label L(x) and private label S(x).
struct LabeledDataset {
  Matrix features;                  // N x d
  std::vector<int> public_labels;   // 0/1
  std::vector<int> private_labels;  // 0/1
  std::string provenance;  // designer-set | owner-set | encoded | original | baseline-*
  std::string generator;   // e.g. "synthetic", "mnist"
  std::string label_rule;  // "bit-split" | "parity-magnitude" | "none"
  std::uint64_t seed = 0;

  std::size_t size() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
  void validate() const;  // throws ConfigError on broken invariants
};

/// Parameters of the synthetic 4-class generator: clusters of correlated
/// Gaussian blobs on hypercube vertices, plus redundant and noise features.
struct SyntheticSpec {
  std::size_t n_samples = 10000;
  std::size_t n_features = 10;
  std::size_t n_informative = 3;
  std::size_t n_redundant = 2;
  std::size_t n_noise = 5;
  std::size_t n_classes = 4;
  std::size_t clusters_per_class = 2;
  double hypercube_side = 2.0;
  double same_class_fraction = 0.99;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Generation procedure (all randomness from `rng`, in this order):
///   1. assign the n_classes * clusters_per_class clusters to distinct
///      vertices of the informative-space hypercube (random permutation);
///   2. draw the shared redundant-combination matrix (uniform [-1, 1]);
///   3. per cluster: a mixing matrix (uniform [-1, 1]), then per sample
///      standard-normal informative coordinates, mixed and translated to the
///      cluster vertex;
///   4. standard-normal noise features;
///   5. flip each sample's class to a uniformly random class with probability
///      1 - same_class_fraction;
///   6. shuffle sample order, then feature column order;
///   7. derive labels from the class index via the bit-split rule.
LabeledDataset generate_synthetic(const SyntheticSpec& spec, Prng& rng);
LabeledDataset generate_synthetic(const SyntheticSpec& spec);  // seeds rng from spec.seed

/// Raw digit images as parsed from the IDX pair: pixels scaled to [0, 1],
/// flattened row-major to one row per image.
struct RawDigits {
  Matrix images;
  std::vector<int> digits;  // 0..9
};

/// Parses the big-endian IDX pair (image magic 2051, label magic 2049).
/// Throws ParseError with a distinct message for a bad magic, a truncated
/// file, or an image/label count mismatch; IoError when a file cannot be
/// opened.
RawDigits load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// How raw labels map to the (public, private) pair:
///   BitSplit         class in 0..3  -> public = bit 0, private = bit 1
///   ParityMagnitude  digit in 0..9  -> public = digit odd, private = digit > 4
enum class LabelRule { BitSplit, ParityMagnitude };

std::string_view to_string(LabelRule rule);
LabelRule label_rule_from_string(std::string_view name);

std::pair<std::vector<int>, std::vector<int>> derive_labels(const std::vector<int>& raw,
                                                            LabelRule rule);

struct SplitResult {
  LabeledDataset train;
  LabeledDataset validation;
};

/// Stratified split by (public, private) label pair. Per-stratum validation
/// counts are apportioned by largest remainder, so each stratum stays within
/// one sample of its proportional share. Falls back to an unstratified split
/// (with a stderr warning) when a stratum has fewer than 5 samples.
SplitResult split(const LabeledDataset& dataset, double val_fraction, Prng& rng);

/// Dataset file: versioned columnar text. Header lines (fixed order):
///   infoshape.dataset.v1
///   n_samples N / n_features D / provenance .. / generator .. /
///   label_rule .. / seed .. / data
/// followed by N rows of D features plus the two labels, space separated.
/// Doubles are printed with shortest round-trip precision, so
/// load(save(x)) == x bitwise.
void save_dataset(const LabeledDataset& dataset, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

/// Uniform random subset of k samples (without replacement, original order
/// preserved); returns the dataset unchanged when k == 0 or k >= size.
LabeledDataset subset_dataset(const LabeledDataset& dataset, std::size_t k, Prng& rng);

}  // namespace infoshape
