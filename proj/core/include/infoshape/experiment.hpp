#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "infoshape/dataset.hpp"
#include "infoshape/evaluation.hpp"
#include "infoshape/mi.hpp"
#include "infoshape/trainer.hpp"

namespace infoshape {

/// Everything a reproducible run needs. Defaults follow the synthetic
/// experiment; default_config("mnist") swaps in the MNIST-specific values
/// (parity-magnitude labels, classifier with 50 hidden units and 10 epochs).
struct ExperimentConfig {
  std::string dataset = "synthetic";  // "synthetic" | "mnist"
  std::string label_rule = "bit-split";
  double val_fraction = 0.2;
  SyntheticSpec synthetic;
  std::string mnist_images;
  std::string mnist_labels;
  std::size_t mnist_subset = 10000;  // 0 = all samples

  TradeoffConfig tradeoff;
  ClassifierConfig classifier;
  double noise_sigma = 1.0;

  std::uint64_t master_seed = 1;

  void validate() const;
};

ExperimentConfig default_config(const std::string& dataset = "synthetic");

/// Line-oriented config text: one `key value` pair per line, '#' comments.
/// Unknown keys are rejected with the list of valid keys. config_text()
/// renders every key in a fixed order (the canonical form that gets hashed).
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
void apply_config_override(ExperimentConfig& config, const std::string& key,
                           const std::string& value);
std::string config_text(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

/// Reads the embedded config back out of a manifest.json, so a run can be
/// reproduced from the manifest alone.
ExperimentConfig config_from_manifest(const std::string& manifest_path);

// ---------------------------------------------------------------------------
// Subcommands. Each writes its outputs plus a manifest.json capturing the
// canonical config text, its hash, the command name, and the output list;
// rerunning with the same config in single-threaded mode reproduces every
// artifact byte for byte.
// ---------------------------------------------------------------------------

/// Builds the base dataset (synthetic generation or MNIST ingestion + subset
/// + label derivation) and writes it to `out_path`.
void cmd_gen_data(const ExperimentConfig& config, const std::string& out_path);

/// Splits the dataset, trains the encoder on the training split, writes the
/// checkpoint and the per-epoch training record CSV. Throws TrainingError
/// after writing the partial record when an MI estimator diverges.
void cmd_train_encoder(const ExperimentConfig& config, const std::string& data_path,
                       const std::string& checkpoint_path, const std::string& record_path,
                       const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Encodes a dataset file with one of the four variants. `checkpoint_path`
/// is required for the infoshape variant and ignored otherwise.
void cmd_encode(const ExperimentConfig& config, const std::string& variant,
                const std::string& data_path, const std::string& checkpoint_path,
                const std::string& out_path);

/// Splits each variant file with the shared split stream (all variants are
/// row-aligned, so the index sets match), trains the per-cell classifiers and
/// writes report.csv plus per-cell ROC CSV/SVG files into out_dir.
std::vector<EvalCell> cmd_evaluate(const ExperimentConfig& config,
                                   const std::vector<std::pair<std::string, std::string>>& variants,
                                   const std::string& out_dir);

struct EstimateMiResult {
  double final_estimate = 0.0;
  MITrace trace;
};

/// Trains one MI estimator between the (optionally encoded) samples and the
/// chosen label; writes the per-iteration trace CSV
/// (iteration,raw_estimate,smoothed_estimate).
EstimateMiResult cmd_estimate_mi(const ExperimentConfig& config, const std::string& data_path,
                                 const std::string& checkpoint_path, LabelChoice label,
                                 const std::string& trace_path);

struct ExperimentRunResult {
  EncoderTrainRecord record;
  std::vector<EvalCell> cells;  // variants original, random, noise, infoshape x both labels
};

/// Full pipeline into out_dir: dataset, encoder checkpoint + record, the four
/// encoded variants, the evaluation report and one manifest for the tree.
/// Returns the training record and the evaluation matrix.
ExperimentRunResult cmd_run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                       const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace infoshape
