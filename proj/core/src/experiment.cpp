#include "infoshape/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "infoshape/baselines.hpp"
#include "infoshape/error.hpp"
#include "infoshape/io.hpp"

namespace infoshape {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  if (dataset != "synthetic" && dataset != "mnist") {
    throw ConfigError("config: dataset must be 'synthetic' or 'mnist', got '" + dataset + "'");
  }
  label_rule_from_string(label_rule);
  if (dataset == "synthetic" && label_rule != "bit-split") {
    throw ConfigError("config: the synthetic generator produces bit-split labels");
  }
  if (dataset == "mnist" && label_rule != "parity-magnitude") {
    throw ConfigError("config: MNIST digits use the parity-magnitude label rule");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("config: val_fraction must be strictly between 0 and 1");
  }
  if (dataset == "synthetic") synthetic.validate();
  if (dataset == "mnist" && (mnist_images.empty() || mnist_labels.empty())) {
    throw ConfigError("config: mnist.images and mnist.labels paths are required");
  }
  tradeoff.validate();
  classifier.validate();
  if (!(noise_sigma > 0.0)) throw ConfigError("config: noise.sigma must be positive");
}

ExperimentConfig default_config(const std::string& dataset) {
  ExperimentConfig c;
  if (dataset == "mnist") {
    c.dataset = "mnist";
    c.label_rule = "parity-magnitude";
    c.classifier.hidden_dim = 50;
    c.classifier.epochs = 10;
  } else if (dataset != "synthetic") {
    throw ConfigError("default_config: unknown dataset '" + dataset + "'");
  }
  return c;
}

namespace {

std::string join_dims(const std::vector<std::size_t>& dims) {
  std::ostringstream out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out << ',';
    out << dims[i];
  }
  return out.str();
}

std::vector<std::size_t> parse_dims(const std::string& text) {
  std::vector<std::size_t> dims;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const long long v = parse_int(item);
    if (v <= 0) throw ParseError("dimension list entries must be positive: '" + text + "'");
    dims.push_back(static_cast<std::size_t>(v));
  }
  return dims;
}

}  // namespace

std::string config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "dataset " << c.dataset << "\n";
  out << "label_rule " << c.label_rule << "\n";
  out << "val_fraction " << format_double(c.val_fraction) << "\n";
  out << "master_seed " << c.master_seed << "\n";
  out << "synthetic.n_samples " << c.synthetic.n_samples << "\n";
  out << "synthetic.n_features " << c.synthetic.n_features << "\n";
  out << "synthetic.n_informative " << c.synthetic.n_informative << "\n";
  out << "synthetic.n_redundant " << c.synthetic.n_redundant << "\n";
  out << "synthetic.n_noise " << c.synthetic.n_noise << "\n";
  out << "synthetic.n_classes " << c.synthetic.n_classes << "\n";
  out << "synthetic.clusters_per_class " << c.synthetic.clusters_per_class << "\n";
  out << "synthetic.hypercube_side " << format_double(c.synthetic.hypercube_side) << "\n";
  out << "synthetic.same_class_fraction " << format_double(c.synthetic.same_class_fraction)
      << "\n";
  out << "mnist.images " << c.mnist_images << "\n";
  out << "mnist.labels " << c.mnist_labels << "\n";
  out << "mnist.subset " << c.mnist_subset << "\n";
  out << "tradeoff.lambda " << format_double(c.tradeoff.lambda) << "\n";
  out << "tradeoff.epochs " << c.tradeoff.epochs << "\n";
  out << "tradeoff.encoder_lr " << format_double(c.tradeoff.encoder_lr) << "\n";
  out << "tradeoff.encoder_steps_per_epoch " << c.tradeoff.encoder_steps_per_epoch << "\n";
  out << "tradeoff.estimator_reinit_per_epoch " << (c.tradeoff.estimator_reinit_per_epoch ? 1 : 0)
      << "\n";
  out << "tradeoff.encoder_dims " << join_dims(c.tradeoff.encoder_dims) << "\n";
  out << "estimator.iterations " << c.tradeoff.estimator.iterations << "\n";
  out << "estimator.lr " << format_double(c.tradeoff.estimator.lr) << "\n";
  out << "estimator.batch_size " << c.tradeoff.estimator.batch_size << "\n";
  out << "estimator.accumulation_window " << c.tradeoff.estimator.accumulation_window << "\n";
  out << "estimator.reg_coefficient " << format_double(c.tradeoff.estimator.reg_coefficient)
      << "\n";
  out << "estimator.final_average_fraction "
      << format_double(c.tradeoff.estimator.final_average_fraction) << "\n";
  out << "estimator.hidden " << join_dims(c.tradeoff.estimator.hidden_dims) << "\n";
  out << "estimator.divergence_cap " << format_double(c.tradeoff.estimator.divergence_cap) << "\n";
  out << "estimator.smoothing_window " << c.tradeoff.estimator.smoothing_window << "\n";
  out << "classifier.hidden_dim " << c.classifier.hidden_dim << "\n";
  out << "classifier.epochs " << c.classifier.epochs << "\n";
  out << "classifier.batch_size " << c.classifier.batch_size << "\n";
  out << "classifier.lr " << format_double(c.classifier.lr) << "\n";
  out << "noise.sigma " << format_double(c.noise_sigma) << "\n";
  return out.str();
}

void apply_config_override(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto as_size = [&](const std::string& v) {
    const long long n = parse_int(v);
    if (n < 0) throw ParseError("config key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(n);
  };
  if (key == "dataset") {
    c.dataset = value;
  } else if (key == "label_rule") {
    c.label_rule = value;
  } else if (key == "val_fraction") {
    c.val_fraction = parse_double(value);
  } else if (key == "master_seed") {
    c.master_seed = static_cast<std::uint64_t>(parse_int(value));
  } else if (key == "synthetic.n_samples") {
    c.synthetic.n_samples = as_size(value);
  } else if (key == "synthetic.n_features") {
    c.synthetic.n_features = as_size(value);
  } else if (key == "synthetic.n_informative") {
    c.synthetic.n_informative = as_size(value);
  } else if (key == "synthetic.n_redundant") {
    c.synthetic.n_redundant = as_size(value);
  } else if (key == "synthetic.n_noise") {
    c.synthetic.n_noise = as_size(value);
  } else if (key == "synthetic.n_classes") {
    c.synthetic.n_classes = as_size(value);
  } else if (key == "synthetic.clusters_per_class") {
    c.synthetic.clusters_per_class = as_size(value);
  } else if (key == "synthetic.hypercube_side") {
    c.synthetic.hypercube_side = parse_double(value);
  } else if (key == "synthetic.same_class_fraction") {
    c.synthetic.same_class_fraction = parse_double(value);
  } else if (key == "mnist.images") {
    c.mnist_images = value;
  } else if (key == "mnist.labels") {
    c.mnist_labels = value;
  } else if (key == "mnist.subset") {
    c.mnist_subset = as_size(value);
  } else if (key == "tradeoff.lambda") {
    c.tradeoff.lambda = parse_double(value);
  } else if (key == "tradeoff.epochs") {
    c.tradeoff.epochs = as_size(value);
  } else if (key == "tradeoff.encoder_lr") {
    c.tradeoff.encoder_lr = parse_double(value);
  } else if (key == "tradeoff.encoder_steps_per_epoch") {
    c.tradeoff.encoder_steps_per_epoch = as_size(value);
  } else if (key == "tradeoff.estimator_reinit_per_epoch") {
    c.tradeoff.estimator_reinit_per_epoch = parse_int(value) != 0;
  } else if (key == "tradeoff.encoder_dims") {
    c.tradeoff.encoder_dims = parse_dims(value);
  } else if (key == "estimator.iterations") {
    c.tradeoff.estimator.iterations = as_size(value);
  } else if (key == "estimator.lr") {
    c.tradeoff.estimator.lr = parse_double(value);
  } else if (key == "estimator.batch_size") {
    c.tradeoff.estimator.batch_size = as_size(value);
  } else if (key == "estimator.accumulation_window") {
    c.tradeoff.estimator.accumulation_window = as_size(value);
  } else if (key == "estimator.reg_coefficient") {
    c.tradeoff.estimator.reg_coefficient = parse_double(value);
  } else if (key == "estimator.final_average_fraction") {
    c.tradeoff.estimator.final_average_fraction = parse_double(value);
  } else if (key == "estimator.hidden") {
    c.tradeoff.estimator.hidden_dims = parse_dims(value);
  } else if (key == "estimator.divergence_cap") {
    c.tradeoff.estimator.divergence_cap = parse_double(value);
  } else if (key == "estimator.smoothing_window") {
    c.tradeoff.estimator.smoothing_window = as_size(value);
  } else if (key == "classifier.hidden_dim") {
    c.classifier.hidden_dim = as_size(value);
  } else if (key == "classifier.epochs") {
    c.classifier.epochs = as_size(value);
  } else if (key == "classifier.batch_size") {
    c.classifier.batch_size = as_size(value);
  } else if (key == "classifier.lr") {
    c.classifier.lr = parse_double(value);
  } else if (key == "noise.sigma") {
    c.noise_sigma = parse_double(value);
  } else {
    throw ParseError("unknown config key '" + key + "' (see config_text() for the schema)");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  bool dataset_seen = false;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  // First pass only for the dataset key so dataset-specific defaults apply
  // before other keys override them.
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "dataset") {
      std::string value;
      ls >> value;
      c = default_config(value);
      dataset_seen = true;
      break;
    }
  }
  (void)dataset_seen;
  in.clear();
  in.str(text);
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    std::string value;
    std::getline(ls, value);
    const std::size_t start = value.find_first_not_of(" \t");
    value = start == std::string::npos ? std::string() : value.substr(start);
    const std::size_t end = value.find_last_not_of(" \t\r");
    if (end != std::string::npos) value = value.substr(0, end + 1);
    try {
      apply_config_override(c, key, value);
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  return fnv1a64(config_text(config));
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const ExperimentConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "infoshape.manifest";
  j["version"] = 1;
  j["tool_version"] = "1.0.0";
  j["command"] = command;
  j["master_seed"] = config.master_seed;
  j["config_hash"] = hex64(config_hash(config));
  j["config_text"] = config_text(config);
  j["outputs"] = outputs;
  write_text_file(path, j.dump(1) + "\n");
}

LabeledDataset build_base_dataset(const ExperimentConfig& config) {
  if (config.dataset == "synthetic") {
    SyntheticSpec spec = config.synthetic;
    spec.seed = Prng::derive_seed(config.master_seed, "data");
    Prng rng(spec.seed);
    return generate_synthetic(spec, rng);
  }
  const RawDigits raw = load_mnist_idx(config.mnist_images, config.mnist_labels);
  auto [pub, priv] = derive_labels(raw.digits, LabelRule::ParityMagnitude);
  LabeledDataset ds;
  ds.features = raw.images;
  ds.public_labels = std::move(pub);
  ds.private_labels = std::move(priv);
  ds.provenance = "owner-set";
  ds.generator = "mnist";
  ds.label_rule = "parity-magnitude";
  ds.seed = Prng::derive_seed(config.master_seed, "data");
  if (config.mnist_subset > 0 && config.mnist_subset < ds.size()) {
    Prng rng = Prng::substream(config.master_seed, "data/subset");
    ds = subset_dataset(ds, config.mnist_subset, rng);
  }
  return ds;
}

SplitResult shared_split(const ExperimentConfig& config, const LabeledDataset& ds) {
  // Every variant of one experiment is split with a fresh stream from the
  // same derived seed, so the validation index set is identical across
  // row-aligned variants.
  Prng rng = Prng::substream(config.master_seed, "split");
  return split(ds, config.val_fraction, rng);
}

TrainResult train_encoder_for(const ExperimentConfig& config, const LabeledDataset& train_split,
                              const std::function<void(const EpochRecord&)>& on_epoch) {
  return train_infoshape(train_split, config.tradeoff,
                         Prng::derive_seed(config.master_seed, "trainer"), on_epoch);
}

std::vector<std::size_t> encoder_dims_for(const ExperimentConfig& config,
                                          const LabeledDataset& ds) {
  if (!config.tradeoff.encoder_dims.empty()) return config.tradeoff.encoder_dims;
  if (ds.dim() == 10) return encoder_preset_dims(EncoderPreset::Synthetic);
  if (ds.dim() == 784) return encoder_preset_dims(EncoderPreset::Mnist);
  throw ConfigError("no encoder preset for feature dim " + std::to_string(ds.dim()) +
                    "; set tradeoff.encoder_dims");
}

std::string trace_csv(const MITrace& trace) {
  const std::vector<double> smoothed = trace.smoothed();
  std::ostringstream out;
  out << "iteration,raw_estimate,smoothed_estimate\n";
  for (std::size_t i = 0; i < trace.raw.size(); ++i) {
    out << i << ',' << format_double(trace.raw[i]) << ',' << format_double(smoothed[i]) << "\n";
  }
  return out.str();
}

}  // namespace

ExperimentConfig config_from_manifest(const std::string& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + manifest_path + ": " + e.what());
  }
  if (!j.contains("config_text")) {
    throw ParseError("manifest " + manifest_path + ": missing config_text");
  }
  return parse_config_text(j["config_text"].get<std::string>());
}

void cmd_gen_data(const ExperimentConfig& config, const std::string& out_path) {
  config.validate();
  const LabeledDataset ds = build_base_dataset(config);
  save_dataset(ds, out_path);
  write_manifest(config, "gen-data", {fs::path(out_path).filename().string()},
                 out_path + ".manifest.json");
}

void cmd_train_encoder(const ExperimentConfig& config, const std::string& data_path,
                       const std::string& checkpoint_path, const std::string& record_path,
                       const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  const LabeledDataset ds = load_dataset(data_path);
  const SplitResult parts = shared_split(config, ds);
  TradeoffConfig tradeoff = config.tradeoff;
  if (tradeoff.encoder_dims.empty()) tradeoff.encoder_dims = encoder_dims_for(config, ds);
  ExperimentConfig effective = config;
  effective.tradeoff = tradeoff;

  const TrainResult result = train_encoder_for(effective, parts.train, on_epoch);
  write_text_file(record_path, result.record.to_csv());
  if (result.aborted) {
    throw TrainingError("encoder training aborted (" + result.abort_reason +
                        "); partial record written to " + record_path);
  }
  save_checkpoint(result.encoder.net, checkpoint_path, result.encoder.preset,
                  config_hash(config));
  write_manifest(config, "train-encoder",
                 {fs::path(checkpoint_path).filename().string(),
                  fs::path(record_path).filename().string()},
                 checkpoint_path + ".manifest.json");
}

void cmd_encode(const ExperimentConfig& config, const std::string& variant,
                const std::string& data_path, const std::string& checkpoint_path,
                const std::string& out_path) {
  config.validate();
  const LabeledDataset ds = load_dataset(data_path);
  LabeledDataset encoded;
  if (variant == "infoshape") {
    if (checkpoint_path.empty()) throw UsageError("encode: infoshape variant needs a checkpoint");
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    encoded = encode_dataset(EncoderModel{ck.net, ck.preset}, ds, "encoded");
  } else if (variant == "random") {
    const EncoderModel enc = random_encoder(encoder_dims_for(config, ds), config.master_seed);
    encoded = encode_dataset(enc, ds, "baseline-random");
  } else if (variant == "noise") {
    encoded = gaussian_noise_encoder(config.noise_sigma,
                                     Prng::derive_seed(config.master_seed, "baseline/noise"))
                  .encode(ds);
  } else if (variant == "identity") {
    encoded = identity_encode(ds);
  } else {
    throw UsageError("encode: unknown variant '" + variant +
                     "' (expected infoshape|random|noise|identity)");
  }
  save_dataset(encoded, out_path);
  write_manifest(config, "encode", {fs::path(out_path).filename().string()},
                 out_path + ".manifest.json");
}

std::vector<EvalCell> cmd_evaluate(
    const ExperimentConfig& config,
    const std::vector<std::pair<std::string, std::string>>& variants, const std::string& out_dir) {
  config.validate();
  if (variants.empty()) throw UsageError("evaluate: need at least one variant");
  fs::create_directories(out_dir);

  std::vector<EvalVariant> eval_variants;
  for (const auto& [name, path] : variants) {
    const LabeledDataset ds = load_dataset(path);
    SplitResult parts = shared_split(config, ds);
    eval_variants.push_back({name, std::move(parts.train), std::move(parts.validation)});
  }

  const std::vector<EvalCell> cells =
      evaluate_matrix(eval_variants, config.classifier, config.master_seed);

  std::vector<std::string> outputs;
  outputs.push_back("report.csv");
  write_text_file((fs::path(out_dir) / "report.csv").string(), report_csv(cells));
  for (const EvalCell& cell : cells) {
    const std::string base = "roc_" + cell.variant + "_" + std::string(to_string(cell.label));
    write_text_file((fs::path(out_dir) / (base + ".csv")).string(), cell.roc.points_csv());
    PlotSeries series;
    series.label = cell.variant + "/" + std::string(to_string(cell.label)) +
                   " auc=" + format_double(cell.auc);
    for (const RocPoint& p : cell.roc.points) {
      series.x.push_back(p.fpr);
      series.y.push_back(p.tpr);
    }
    write_svg_plot((fs::path(out_dir) / (base + ".svg")).string(), "validation ROC", {series});
    outputs.push_back(base + ".csv");
    outputs.push_back(base + ".svg");
  }
  write_manifest(config, "evaluate", outputs, (fs::path(out_dir) / "manifest.json").string());
  return cells;
}

EstimateMiResult cmd_estimate_mi(const ExperimentConfig& config, const std::string& data_path,
                                 const std::string& checkpoint_path, LabelChoice label,
                                 const std::string& trace_path) {
  config.validate();
  LabeledDataset ds = load_dataset(data_path);
  if (!checkpoint_path.empty()) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    ds = encode_dataset(EncoderModel{ck.net, ck.preset}, ds, "encoded");
  }
  PairedBatch samples;
  samples.alpha = ds.features;
  const std::vector<int>& raw =
      label == LabelChoice::Public ? ds.public_labels : ds.private_labels;
  samples.beta.assign(raw.begin(), raw.end());

  Prng rng = Prng::substream(config.master_seed,
                             "estimate-mi/" + std::string(to_string(label)));
  const MIEstimate estimate = train_mi_estimator(samples, config.tradeoff.estimator, rng);
  write_text_file(trace_path, trace_csv(estimate.trace));
  write_manifest(config, "estimate-mi", {fs::path(trace_path).filename().string()},
                 trace_path + ".manifest.json");
  return EstimateMiResult{estimate.final_estimate, estimate.trace};
}

ExperimentRunResult cmd_run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                       const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "encoded");
  std::vector<std::string> outputs;

  const LabeledDataset base = build_base_dataset(config);
  save_dataset(base, (fs::path(out_dir) / "dataset.txt").string());
  outputs.push_back("dataset.txt");

  const SplitResult parts = shared_split(config, base);

  ExperimentConfig effective = config;
  if (effective.tradeoff.encoder_dims.empty()) {
    effective.tradeoff.encoder_dims = encoder_dims_for(config, base);
  }
  const TrainResult trained = train_encoder_for(effective, parts.train, on_epoch);
  write_text_file((fs::path(out_dir) / "training_record.csv").string(), trained.record.to_csv());
  outputs.push_back("training_record.csv");
  {
    PlotSeries pub{"I[L;T]", {}, {}}, priv{"I[S;T]", {}, {}};
    for (const EpochRecord& e : trained.record.epochs) {
      pub.x.push_back(static_cast<double>(e.epoch));
      pub.y.push_back(e.i_public);
      priv.x.push_back(static_cast<double>(e.epoch));
      priv.y.push_back(e.i_private);
    }
    write_svg_plot((fs::path(out_dir) / "training_record.svg").string(),
                   "estimated MI per epoch (nats)", {pub, priv});
    outputs.push_back("training_record.svg");
  }
  if (trained.aborted) {
    throw TrainingError("encoder training aborted (" + trained.abort_reason +
                        "); partial record written to " + out_dir);
  }
  save_checkpoint(trained.encoder.net, (fs::path(out_dir) / "encoder.json").string(),
                  trained.encoder.preset, config_hash(config));
  outputs.push_back("encoder.json");

  const std::vector<std::pair<std::string, LabeledDataset>> encoded = {
      {"original", identity_encode(base)},
      {"random", encode_dataset(random_encoder(encoder_dims_for(config, base),
                                               config.master_seed),
                                base, "baseline-random")},
      {"noise", gaussian_noise_encoder(config.noise_sigma,
                                       Prng::derive_seed(config.master_seed, "baseline/noise"))
                    .encode(base)},
      {"infoshape", encode_dataset(trained.encoder, base, "encoded")},
  };
  std::vector<std::pair<std::string, std::string>> variant_files;
  for (const auto& [name, ds] : encoded) {
    const std::string rel = "encoded/" + name + ".txt";
    save_dataset(ds, (fs::path(out_dir) / rel).string());
    outputs.push_back(rel);
    variant_files.emplace_back(name, (fs::path(out_dir) / rel).string());
  }

  const std::vector<EvalCell> cells =
      cmd_evaluate(config, variant_files, (fs::path(out_dir) / "report").string());
  outputs.push_back("report/report.csv");
  for (const EvalCell& cell : cells) {
    const std::string base_name =
        "report/roc_" + cell.variant + "_" + std::string(to_string(cell.label));
    outputs.push_back(base_name + ".csv");
    outputs.push_back(base_name + ".svg");
  }

  write_manifest(config, "run-experiment", outputs,
                 (fs::path(out_dir) / "manifest.json").string());
  return ExperimentRunResult{trained.record, cells};
}

}  // namespace infoshape
