#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "infoshape/dataset.hpp"
#include "infoshape/mi.hpp"
#include "infoshape/mlp.hpp"
#include "infoshape/optim.hpp"

namespace infoshape {

/// Lossy encoder T: an all-Tanh dense network so codes stay inside (-1, 1).
struct EncoderModel {
  Mlp net;
  std::string preset;  // e.g. "synthetic-10-10-3", "mnist-784-50-10", "custom"
};

enum class EncoderPreset { Synthetic, Mnist };

/// Synthetic preset: 10 -> 10 -> 3. Mnist preset: 784 -> 50 -> 10.
EncoderModel make_encoder(EncoderPreset preset, Prng& rng);
EncoderModel make_encoder(const std::vector<std::size_t>& dims, Prng& rng);
std::vector<std::size_t> encoder_preset_dims(EncoderPreset preset);

/// Encoder training configuration: the privacy/utility trade-off weight, the
/// outer epoch schedule, and the MI-estimator schedule used inside each epoch.
struct TradeoffConfig {
  double lambda = 1.0;
  std::size_t epochs = 50;
  double encoder_lr = 1e-3;
  std::size_t encoder_steps_per_epoch = 1;
  MIEstimatorConfig estimator;
  bool estimator_reinit_per_epoch = true;
  std::vector<std::size_t> encoder_dims;  // empty = pick a preset from the data dim

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;   // 1-based
  double i_public = 0.0;   // estimated I[L(x); T(x)], nats
  double i_private = 0.0;  // estimated I[S(x); T(x)], nats
  double h_public = 0.0;   // H[L(x)], nats (constant for a fixed dataset)
  double h_private = 0.0;  // H[S(x)], nats
  double m_utility = 0.0;  // i_public - h_public
  double m_privacy = 0.0;  // h_private - i_private
  double q = 0.0;          // m_privacy + lambda * m_utility
};

struct EncoderTrainRecord {
  std::vector<EpochRecord> epochs;

  /// CSV with columns epoch,i_public,i_private,h_public,h_private,
  /// m_utility,m_privacy,q.
  std::string to_csv() const;
};

/// Empirical Shannon entropy of a binary label vector, in nats. Zero for a
/// degenerate distribution; UsageError on an empty vector.
double label_entropy(const std::vector<int>& labels);

/// (M_utility, M_privacy) = (I_L - H_L, H_S - I_S).
std::pair<double, double> utility_privacy_scores(double i_public, double i_private,
                                                 double h_public, double h_private);

/// One fixed batch for an encoder update: raw features, both labels, and the
/// product-term permutations, frozen so the objective is a deterministic
/// function of the encoder parameters.
struct EncoderBatch {
  Matrix x;
  std::vector<double> pub;
  std::vector<double> priv;
  std::vector<std::size_t> pub_perm;
  std::vector<std::size_t> priv_perm;

  std::size_t size() const { return x.rows(); }
};

EncoderBatch make_encoder_batch(const LabeledDataset& data, std::size_t batch_size, Prng& rng);

/// The minimized training objective on one batch with both estimators frozen:
///   Q_hat(theta) = lambda * DV_priv(theta) - DV_pub(theta)
/// Driving Q_hat down pushes I[L;T] up and I[S;T] down; the entropy constants
/// play no role here because they do not depend on theta.
double encoder_objective(const EncoderModel& encoder, const MIEstimatorNet& net_pub,
                         const MIEstimatorNet& net_priv, const EncoderBatch& batch, double lambda);

/// Gradient of encoder_objective with respect to the encoder parameters only,
/// obtained by chaining the frozen critics' input gradients through the
/// encoder. Throws TrainingError when the gradient is non-finite.
Gradients encoder_loss_gradient(const EncoderModel& encoder, const MIEstimatorNet& net_pub,
                                const MIEstimatorNet& net_priv, const EncoderBatch& batch,
                                double lambda);

struct TrainResult {
  EncoderModel encoder;
  EncoderTrainRecord record;
  bool aborted = false;       // an MI estimator diverged; record is partial
  std::string abort_reason;
};

/// Trains the encoder per the outer loop: each epoch encodes the dataset,
/// (re-)trains both MI estimators to their full schedule on purpose-tagged
/// substreams, records estimates and scores, then applies
/// encoder_steps_per_epoch Adam updates through the frozen critics.
/// `on_epoch` (when set) observes each record as it is produced.
TrainResult train_infoshape(const LabeledDataset& train_set, const TradeoffConfig& config,
                            std::uint64_t seed,
                            const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Replaces features by T(x); labels and metadata are carried through.
LabeledDataset encode_dataset(const EncoderModel& encoder, const LabeledDataset& dataset,
                              std::string_view provenance = "encoded");

}  // namespace infoshape
