#include "infoshape/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "infoshape/error.hpp"
#include "infoshape/io.hpp"
#include "infoshape/optim.hpp"

namespace infoshape {

void ClassifierConfig::validate() const {
  if (hidden_dim == 0) throw ConfigError("ClassifierConfig: hidden_dim must be positive");
  if (batch_size == 0) throw ConfigError("ClassifierConfig: batch_size must be positive");
  if (lr <= 0) throw ConfigError("ClassifierConfig: lr must be positive");
}

std::string_view to_string(LabelChoice c) {
  return c == LabelChoice::Public ? "public" : "private";
}

ClassifierModel make_classifier(std::size_t input_dim, const ClassifierConfig& config, Prng& rng) {
  config.validate();
  return ClassifierModel{init_weights({input_dim, config.hidden_dim, 1},
                                      {Activation::ReLU, Activation::Sigmoid}, rng)};
}

namespace {

const std::vector<int>& labels_of(const LabeledDataset& data, LabelChoice label) {
  return label == LabelChoice::Public ? data.public_labels : data.private_labels;
}

constexpr double kProbClamp = 1e-12;

double bce_mean(const std::vector<double>& y, const std::vector<int>& t) {
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::clamp(y[i], kProbClamp, 1.0 - kProbClamp);
    loss += t[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return loss / static_cast<double>(y.size());
}

}  // namespace

ClassifierModel train_classifier(const LabeledDataset& train, LabelChoice label,
                                 const ClassifierConfig& config, Prng& rng) {
  train.validate();
  config.validate();
  ClassifierModel model = make_classifier(train.dim(), config, rng);
  const std::vector<int>& targets = labels_of(train, label);
  const std::size_t n = train.size();

  Matrix batch;
  Matrix out;
  Matrix output_grad;
  ForwardCache cache;
  BackwardResult bwd;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<std::size_t> order = rng.permutation(n);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      batch.reshape(count, train.dim());
      for (std::size_t r = 0; r < count; ++r) {
        const double* src = train.features.row(order[start + r]);
        double* dst = batch.row(r);
        std::copy(src, src + train.dim(), dst);
      }

      forward(model.net, batch, out, &cache);

      // Mean BCE through the sigmoid: d loss / d y = (y - t) / (y (1 - y)) / n;
      // the sigmoid derivative in backward() cancels the denominator, so the
      // pre-activation gradient is the familiar (y - t) / n.
      output_grad.reshape(count, 1);
      double loss = 0.0;
      for (std::size_t r = 0; r < count; ++r) {
        const double y = std::clamp(out(r, 0), kProbClamp, 1.0 - kProbClamp);
        const double t = static_cast<double>(targets[order[start + r]]);
        loss += t > 0.5 ? -std::log(y) : -std::log(1.0 - y);
        output_grad(r, 0) = (y - t) / (y * (1.0 - y)) / static_cast<double>(count);
      }
      if (!std::isfinite(loss)) {
        throw TrainingError("classifier loss went non-finite at epoch " + std::to_string(epoch));
      }

      backward(model.net, cache, output_grad, bwd);
      sgd_step(model.net, bwd.grads, config.lr);
    }
  }
  return model;
}

std::vector<double> classifier_scores(const ClassifierModel& model, const Matrix& features) {
  const Matrix out = forward(model.net, features);
  std::vector<double> scores(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) scores[r] = out(r, 0);
  return scores;
}

double classifier_loss(const ClassifierModel& model, const LabeledDataset& data,
                       LabelChoice label) {
  return bce_mean(classifier_scores(model, data.features), labels_of(data, label));
}

RocReport roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw UsageError("roc_auc: scores and labels must have the same length");
  }
  RocReport report;
  for (int l : labels) {
    if (l == 1) {
      ++report.n_pos;
    } else if (l == 0) {
      ++report.n_neg;
    } else {
      throw UsageError("roc_auc: labels must be 0/1");
    }
  }
  if (report.n_pos == 0 || report.n_neg == 0) {
    throw UsageError("roc_auc: need at least one positive and one negative label");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney statistic with mid-ranks for ties: each tied (pos, neg) pair
  // contributes half credit.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum_pos += mid_rank;
    }
    i = j;
  }
  const double n_pos = static_cast<double>(report.n_pos);
  const double n_neg = static_cast<double>(report.n_neg);
  report.auc = (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);

  // Threshold sweep from the highest score down; ties move diagonally.
  report.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  std::size_t r = order.size();
  while (r > 0) {
    std::size_t q = r;
    while (q > 0 && scores[order[q - 1]] == scores[order[r - 1]]) --q;
    for (std::size_t k = q; k < r; ++k) {
      if (labels[order[k]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
    report.points.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos});
    r = q;
  }
  return report;
}

std::string RocReport::points_csv() const {
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (const RocPoint& p : points) {
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << "\n";
  }
  return out.str();
}

std::vector<EvalCell> evaluate_matrix(const std::vector<EvalVariant>& variants,
                                      const ClassifierConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<EvalCell> cells;
  for (const EvalVariant& variant : variants) {
    variant.train.validate();
    variant.validation.validate();
    for (LabelChoice label : {LabelChoice::Public, LabelChoice::Private}) {
      EvalCell cell;
      cell.variant = variant.name;
      cell.label = label;
      cell.n_val = variant.validation.size();
      cell.seed = Prng::derive_seed(
          seed, "eval/" + variant.name + "/" + std::string(to_string(label)));
      Prng rng(cell.seed);
      const ClassifierModel model = train_classifier(variant.train, label, config, rng);
      const std::vector<double> scores = classifier_scores(model, variant.validation.features);
      cell.roc = roc_auc(scores, labels_of(variant.validation, label));
      cell.auc = cell.roc.auc;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string report_csv(const std::vector<EvalCell>& cells) {
  std::ostringstream out;
  out << "variant,label_type,auc,n_val,seed\n";
  for (const EvalCell& c : cells) {
    out << c.variant << ',' << to_string(c.label) << ',' << format_double(c.auc) << ',' << c.n_val
        << ',' << c.seed << "\n";
  }
  return out.str();
}

}  // namespace infoshape
