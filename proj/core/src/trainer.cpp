#include "infoshape/trainer.hpp"

#include <cmath>
#include <sstream>

#include "infoshape/error.hpp"
#include "infoshape/io.hpp"

namespace infoshape {

std::vector<std::size_t> encoder_preset_dims(EncoderPreset preset) {
  switch (preset) {
    case EncoderPreset::Synthetic: return {10, 10, 3};
    case EncoderPreset::Mnist: return {784, 50, 10};
  }
  throw ConfigError("unknown encoder preset");
}

namespace {

std::string preset_tag(const std::vector<std::size_t>& dims) {
  std::ostringstream tag;
  if (dims == encoder_preset_dims(EncoderPreset::Synthetic)) {
    tag << "synthetic";
  } else if (dims == encoder_preset_dims(EncoderPreset::Mnist)) {
    tag << "mnist";
  } else {
    tag << "custom";
  }
  for (std::size_t d : dims) tag << '-' << d;
  return tag.str();
}

}  // namespace

EncoderModel make_encoder(const std::vector<std::size_t>& dims, Prng& rng) {
  std::vector<Activation> acts(dims.size() - 1, Activation::Tanh);
  return EncoderModel{init_weights(dims, acts, rng), preset_tag(dims)};
}

EncoderModel make_encoder(EncoderPreset preset, Prng& rng) {
  return make_encoder(encoder_preset_dims(preset), rng);
}

void TradeoffConfig::validate() const {
  if (lambda < 0) throw ConfigError("TradeoffConfig: lambda must be >= 0");
  if (epochs == 0) throw ConfigError("TradeoffConfig: epochs must be >= 1");
  if (encoder_lr <= 0) throw ConfigError("TradeoffConfig: encoder_lr must be positive");
  estimator.validate();
}

std::string EncoderTrainRecord::to_csv() const {
  std::ostringstream out;
  out << "epoch,i_public,i_private,h_public,h_private,m_utility,m_privacy,q\n";
  for (const EpochRecord& e : epochs) {
    out << e.epoch << ',' << format_double(e.i_public) << ',' << format_double(e.i_private) << ','
        << format_double(e.h_public) << ',' << format_double(e.h_private) << ','
        << format_double(e.m_utility) << ',' << format_double(e.m_privacy) << ','
        << format_double(e.q) << "\n";
  }
  return out.str();
}

double label_entropy(const std::vector<int>& labels) {
  if (labels.empty()) throw UsageError("label_entropy: empty label vector");
  std::size_t ones = 0;
  for (int v : labels) {
    if (v != 0 && v != 1) throw UsageError("label_entropy: labels must be 0/1");
    ones += static_cast<std::size_t>(v);
  }
  const double p = static_cast<double>(ones) / static_cast<double>(labels.size());
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

std::pair<double, double> utility_privacy_scores(double i_public, double i_private,
                                                 double h_public, double h_private) {
  return {i_public - h_public, h_private - i_private};
}

EncoderBatch make_encoder_batch(const LabeledDataset& data, std::size_t batch_size, Prng& rng) {
  data.validate();
  if (batch_size < 2) throw UsageError("make_encoder_batch: batch_size must be at least 2");
  const std::vector<std::size_t> idx = rng.sample_indices(data.size(), batch_size);
  EncoderBatch b;
  b.x.reshape(batch_size, data.dim());
  b.pub.resize(batch_size);
  b.priv.resize(batch_size);
  for (std::size_t r = 0; r < batch_size; ++r) {
    const double* src = data.features.row(idx[r]);
    double* dst = b.x.row(r);
    for (std::size_t c = 0; c < data.dim(); ++c) dst[c] = src[c];
    b.pub[r] = static_cast<double>(data.public_labels[idx[r]]);
    b.priv[r] = static_cast<double>(data.private_labels[idx[r]]);
  }
  b.pub_perm = rng.permutation(batch_size);
  b.priv_perm = rng.permutation(batch_size);
  return b;
}

namespace {

// DV value of one frozen critic on [T, y] joint rows and [T, y[perm]] product
// rows; optionally accumulates d(DV)/dT into code_grad (rows align with T).
double critic_dv_and_code_grad(const MIEstimatorNet& critic, const Matrix& codes,
                               const std::vector<double>& beta,
                               const std::vector<std::size_t>& perm, Matrix* code_grad) {
  const std::size_t n = codes.rows();
  const std::size_t k = codes.cols();
  Matrix input(2 * n, k + 1);
  for (std::size_t r = 0; r < n; ++r) {
    const double* src = codes.row(r);
    double* joint_row = input.row(r);
    double* prod_row = input.row(n + r);
    for (std::size_t c = 0; c < k; ++c) {
      joint_row[c] = src[c];
      prod_row[c] = src[c];
    }
    joint_row[k] = beta[r];
    prod_row[k] = beta[perm[r]];
  }

  ForwardCache cache;
  Matrix scores = forward(critic.net, input, code_grad ? &cache : nullptr);

  double joint_mean = 0.0;
  for (std::size_t r = 0; r < n; ++r) joint_mean += scores(r, 0);
  joint_mean /= static_cast<double>(n);

  double f_max = scores(n, 0);
  for (std::size_t r = 1; r < n; ++r) f_max = std::max(f_max, scores(n + r, 0));
  std::vector<double> expf(n);
  double exp_sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    expf[r] = std::exp(scores(n + r, 0) - f_max);
    exp_sum += expf[r];
  }
  const double lme = f_max + std::log(exp_sum / static_cast<double>(n));
  const double dv = joint_mean - lme;
  if (!std::isfinite(dv)) throw TrainingError("frozen critic produced a non-finite DV value");

  if (code_grad) {
    // d(DV)/dF: +1/n on joint rows, -softmax on product rows.
    Matrix output_grad(2 * n, 1);
    const double joint_coeff = 1.0 / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      output_grad(r, 0) = joint_coeff;
      output_grad(n + r, 0) = -expf[r] / exp_sum;
    }
    BackwardResult bwd = backward(critic.net, cache, output_grad);
    // Both halves reference the same code row r; the label column is not a
    // function of theta and is dropped.
    code_grad->reshape(n, k);
    for (std::size_t r = 0; r < n; ++r) {
      const double* joint_g = bwd.input_grad.row(r);
      const double* prod_g = bwd.input_grad.row(n + r);
      double* dst = code_grad->row(r);
      for (std::size_t c = 0; c < k; ++c) dst[c] = joint_g[c] + prod_g[c];
    }
  }
  return dv;
}

void check_encoder_batch(const EncoderModel& encoder, const EncoderBatch& batch) {
  if (batch.x.cols() != encoder.net.input_dim()) {
    throw ConfigError("encoder batch feature dim does not match the encoder input");
  }
  if (batch.pub.size() != batch.size() || batch.priv.size() != batch.size() ||
      batch.pub_perm.size() != batch.size() || batch.priv_perm.size() != batch.size()) {
    throw UsageError("encoder batch fields have inconsistent lengths");
  }
}

}  // namespace

double encoder_objective(const EncoderModel& encoder, const MIEstimatorNet& net_pub,
                         const MIEstimatorNet& net_priv, const EncoderBatch& batch,
                         double lambda) {
  check_encoder_batch(encoder, batch);
  const Matrix codes = forward(encoder.net, batch.x);
  const double dv_pub = critic_dv_and_code_grad(net_pub, codes, batch.pub, batch.pub_perm, nullptr);
  const double dv_priv =
      critic_dv_and_code_grad(net_priv, codes, batch.priv, batch.priv_perm, nullptr);
  return lambda * dv_priv - dv_pub;
}

Gradients encoder_loss_gradient(const EncoderModel& encoder, const MIEstimatorNet& net_pub,
                                const MIEstimatorNet& net_priv, const EncoderBatch& batch,
                                double lambda) {
  check_encoder_batch(encoder, batch);
  ForwardCache cache;
  const Matrix codes = forward(encoder.net, batch.x, &cache);

  Matrix grad_pub, grad_priv;
  critic_dv_and_code_grad(net_pub, codes, batch.pub, batch.pub_perm, &grad_pub);
  critic_dv_and_code_grad(net_priv, codes, batch.priv, batch.priv_perm, &grad_priv);

  Matrix objective_grad(codes.rows(), codes.cols());
  for (std::size_t i = 0; i < objective_grad.size(); ++i) {
    objective_grad.values()[i] = lambda * grad_priv.values()[i] - grad_pub.values()[i];
  }

  BackwardResult bwd = backward(encoder.net, cache, objective_grad);
  if (!bwd.grads.all_finite()) {
    throw TrainingError("encoder gradient is non-finite");
  }
  return std::move(bwd.grads);
}

TrainResult train_infoshape(const LabeledDataset& train_set, const TradeoffConfig& config,
                            std::uint64_t seed,
                            const std::function<void(const EpochRecord&)>& on_epoch) {
  train_set.validate();
  config.validate();
  if (train_set.size() < 2) throw UsageError("train_infoshape: need at least 2 samples");

  std::vector<std::size_t> dims = config.encoder_dims;
  if (dims.empty()) {
    if (train_set.dim() == 10) {
      dims = encoder_preset_dims(EncoderPreset::Synthetic);
    } else if (train_set.dim() == 784) {
      dims = encoder_preset_dims(EncoderPreset::Mnist);
    } else {
      throw ConfigError("train_infoshape: no encoder preset for feature dim " +
                        std::to_string(train_set.dim()) + "; set encoder_dims explicitly");
    }
  }
  if (dims.front() != train_set.dim()) {
    throw ConfigError("train_infoshape: encoder input dim does not match the dataset");
  }

  Prng init_rng = Prng::substream(seed, "encoder/init");
  TrainResult result;
  result.encoder = make_encoder(dims, init_rng);
  AdamState adam = AdamState::init(result.encoder.net, AdamConfig{.lr = config.encoder_lr});
  Prng update_rng = Prng::substream(seed, "encoder/updates");

  const double h_public = label_entropy(train_set.public_labels);
  const double h_private = label_entropy(train_set.private_labels);

  MIEstimatorNet warm_pub, warm_priv;
  bool have_warm = false;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const LabeledDataset encoded = encode_dataset(result.encoder, train_set);

    PairedBatch joint_pub{encoded.features, {}};
    PairedBatch joint_priv{encoded.features, {}};
    joint_pub.beta.assign(train_set.public_labels.begin(), train_set.public_labels.end());
    joint_priv.beta.assign(train_set.private_labels.begin(), train_set.private_labels.end());

    Prng rng_pub = Prng::substream(seed, "mi/public/epoch", epoch);
    Prng rng_priv = Prng::substream(seed, "mi/private/epoch", epoch);

    MIEstimate est_pub, est_priv;
    try {
      const MIEstimatorNet* warm = (!config.estimator_reinit_per_epoch && have_warm) ? &warm_pub
                                                                                     : nullptr;
      est_pub = train_mi_estimator(joint_pub, config.estimator, rng_pub, warm);
      warm = (!config.estimator_reinit_per_epoch && have_warm) ? &warm_priv : nullptr;
      est_priv = train_mi_estimator(joint_priv, config.estimator, rng_priv, warm);
    } catch (const TrainingError& e) {
      result.aborted = true;
      result.abort_reason = "epoch " + std::to_string(epoch) + ": " + e.what();
      return result;
    }
    if (!config.estimator_reinit_per_epoch) {
      warm_pub = est_pub.net;
      warm_priv = est_priv.net;
      have_warm = true;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.i_public = est_pub.final_estimate;
    rec.i_private = est_priv.final_estimate;
    rec.h_public = h_public;
    rec.h_private = h_private;
    std::tie(rec.m_utility, rec.m_privacy) =
        utility_privacy_scores(rec.i_public, rec.i_private, h_public, h_private);
    rec.q = rec.m_privacy + config.lambda * rec.m_utility;
    result.record.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    for (std::size_t step = 0; step < config.encoder_steps_per_epoch; ++step) {
      const EncoderBatch batch =
          make_encoder_batch(train_set,
                             std::min<std::size_t>(config.estimator.batch_size, train_set.size()),
                             update_rng);
      Gradients g;
      try {
        g = encoder_loss_gradient(result.encoder, est_pub.net, est_priv.net, batch, config.lambda);
      } catch (const TrainingError& e) {
        result.aborted = true;
        result.abort_reason = "epoch " + std::to_string(epoch) + ": " + e.what();
        return result;
      }
      adam_step(result.encoder.net, g, adam);
    }
  }
  return result;
}

LabeledDataset encode_dataset(const EncoderModel& encoder, const LabeledDataset& dataset,
                              std::string_view provenance) {
  if (dataset.dim() != encoder.net.input_dim()) {
    throw ConfigError("encode_dataset: dataset dim " + std::to_string(dataset.dim()) +
                      " does not match encoder input " + std::to_string(encoder.net.input_dim()));
  }
  LabeledDataset out;
  out.features = forward(encoder.net, dataset.features);
  out.public_labels = dataset.public_labels;
  out.private_labels = dataset.private_labels;
  out.provenance = std::string(provenance);
  out.generator = dataset.generator;
  out.label_rule = dataset.label_rule;
  out.seed = dataset.seed;
  return out;
}

}  // namespace infoshape
