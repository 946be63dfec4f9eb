#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "infoshape/dataset.hpp"
#include "infoshape/mlp.hpp"

namespace infoshape {

/// Downstream classifier: one ReLU hidden layer, one Sigmoid output, trained
/// with minibatch SGD on binary cross-entropy.
struct ClassifierConfig {
  std::size_t hidden_dim = 20;
  std::size_t epochs = 50;
  std::size_t batch_size = 100;
  double lr = 1e-4;

  void validate() const;
};

enum class LabelChoice { Public, Private };
std::string_view to_string(LabelChoice c);

struct ClassifierModel {
  Mlp net;
};

ClassifierModel make_classifier(std::size_t input_dim, const ClassifierConfig& config, Prng& rng);

/// Minibatch SGD on BCE; epoch order reshuffles each epoch from `rng`.
/// Throws TrainingError when the loss goes non-finite.
ClassifierModel train_classifier(const LabeledDataset& train, LabelChoice label,
                                 const ClassifierConfig& config, Prng& rng);

/// Sigmoid outputs in (0, 1), one per row.
std::vector<double> classifier_scores(const ClassifierModel& model, const Matrix& features);

/// Mean binary cross-entropy of the model on the given labels.
double classifier_loss(const ClassifierModel& model, const LabeledDataset& data,
                       LabelChoice label);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocReport {
  std::vector<RocPoint> points;  // threshold sweep from (0,0) to (1,1)
  double auc = 0.0;              // ties half-credited (Mann-Whitney)
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;

  std::string points_csv() const;
};

/// ROC over all unique-score thresholds plus the rank-statistic AUC. Throws
/// UsageError when labels are single-class.
RocReport roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct EvalVariant {
  std::string name;
  LabeledDataset train;
  LabeledDataset validation;
};

struct EvalCell {
  std::string variant;
  LabelChoice label = LabelChoice::Public;
  double auc = 0.0;
  std::size_t n_val = 0;
  std::uint64_t seed = 0;  // substream seed used for this cell
  RocReport roc;
};

/// Trains one classifier per variant x {public, private} on a fresh substream
/// seed and reports the validation ROC/AUC for each cell.
std::vector<EvalCell> evaluate_matrix(const std::vector<EvalVariant>& variants,
                                      const ClassifierConfig& config, std::uint64_t seed);

/// report.csv rows for the matrix: variant,label_type,auc,n_val,seed.
std::string report_csv(const std::vector<EvalCell>& cells);

}  // namespace infoshape
