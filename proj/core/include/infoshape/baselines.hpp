#pragma once

#include <cstdint>

#include "infoshape/dataset.hpp"
#include "infoshape/trainer.hpp"

namespace infoshape {

/// Untrained encoder with the same architecture as the InfoShape preset.
EncoderModel random_encoder(EncoderPreset preset, std::uint64_t seed);
EncoderModel random_encoder(const std::vector<std::size_t>& dims, std::uint64_t seed);

/// Additive white Gaussian noise, x + N(0, sigma^2 I). Noise for a given row
/// is derived from (seed, row index) only, so it does not depend on the other
/// rows. ConfigError when sigma <= 0.
struct GaussianNoiseEncoder {
  double sigma = 1.0;
  std::uint64_t seed = 0;

  Matrix encode(const Matrix& x) const;
  LabeledDataset encode(const LabeledDataset& dataset) const;  // provenance baseline-noise
};

GaussianNoiseEncoder gaussian_noise_encoder(double sigma, std::uint64_t seed);

/// Bitwise pass-through; provenance becomes "original".
LabeledDataset identity_encode(const LabeledDataset& dataset);

}  // namespace infoshape
