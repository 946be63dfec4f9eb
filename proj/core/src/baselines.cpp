#include "infoshape/baselines.hpp"

#include "infoshape/error.hpp"

namespace infoshape {

EncoderModel random_encoder(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  Prng rng = Prng::substream(seed, "baseline/random");
  return make_encoder(dims, rng);
}

EncoderModel random_encoder(EncoderPreset preset, std::uint64_t seed) {
  return random_encoder(encoder_preset_dims(preset), seed);
}

GaussianNoiseEncoder gaussian_noise_encoder(double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian_noise_encoder: sigma must be positive");
  return GaussianNoiseEncoder{sigma, seed};
}

Matrix GaussianNoiseEncoder::encode(const Matrix& x) const {
  if (!(sigma > 0.0)) throw ConfigError("GaussianNoiseEncoder: sigma must be positive");
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    Prng row_rng = Prng::substream(seed, "baseline/noise/row", r);
    double* row = out.row(r);
    for (std::size_t c = 0; c < out.cols(); ++c) row[c] += sigma * row_rng.normal();
  }
  return out;
}

LabeledDataset GaussianNoiseEncoder::encode(const LabeledDataset& dataset) const {
  LabeledDataset out = dataset;
  out.features = encode(dataset.features);
  out.provenance = "baseline-noise";
  return out;
}

LabeledDataset identity_encode(const LabeledDataset& dataset) {
  LabeledDataset out = dataset;
  out.provenance = "original";
  return out;
}

}  // namespace infoshape
