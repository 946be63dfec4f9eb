#include "infoshape/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "infoshape/error.hpp"
#include "infoshape/io.hpp"

namespace infoshape {

void LabeledDataset::validate() const {
  if (public_labels.size() != size() || private_labels.size() != size()) {
    throw ConfigError("LabeledDataset: label lengths do not match the sample count");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if ((public_labels[i] != 0 && public_labels[i] != 1) ||
        (private_labels[i] != 0 && private_labels[i] != 1)) {
      throw ConfigError("LabeledDataset: labels must be 0/1 (row " + std::to_string(i) + ")");
    }
  }
  if (!features.all_finite()) throw ConfigError("LabeledDataset: non-finite feature values");
}

void SyntheticSpec::validate() const {
  if (n_informative + n_redundant + n_noise != n_features) {
    throw UsageError("SyntheticSpec: informative + redundant + noise must equal n_features");
  }
  if (n_informative == 0 || n_informative > 30) {
    throw UsageError("SyntheticSpec: n_informative must be in 1..30");
  }
  if (n_classes < 2 || n_classes > 4) {
    throw UsageError("SyntheticSpec: n_classes must be 2..4 (labels are a 2-bit split)");
  }
  if (clusters_per_class == 0) throw UsageError("SyntheticSpec: clusters_per_class must be >= 1");
  const std::size_t clusters = n_classes * clusters_per_class;
  if (clusters > (std::size_t{1} << n_informative)) {
    throw UsageError("SyntheticSpec: more clusters than hypercube vertices");
  }
  if (n_samples < clusters) throw UsageError("SyntheticSpec: fewer samples than clusters");
  if (same_class_fraction < 0.0 || same_class_fraction > 1.0) {
    throw UsageError("SyntheticSpec: same_class_fraction must be in [0, 1]");
  }
  if (hypercube_side <= 0.0) throw UsageError("SyntheticSpec: hypercube_side must be positive");
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec, Prng& rng) {
  spec.validate();
  const std::size_t n = spec.n_samples;
  const std::size_t k = spec.n_informative;
  const std::size_t clusters = spec.n_classes * spec.clusters_per_class;
  const std::size_t n_vertices = std::size_t{1} << k;
  const double half_side = spec.hypercube_side / 2.0;

  // 1. distinct hypercube vertices for the clusters
  const std::vector<std::size_t> vertex_perm = rng.permutation(n_vertices);

  // 2. shared informative -> redundant combination matrix
  Matrix redundant_mix(k, spec.n_redundant);
  for (double& v : redundant_mix.values()) v = rng.uniform(-1.0, 1.0);

  // 3. per-cluster correlated informative coordinates, translated to vertices
  Matrix informative(n, k);
  std::vector<int> classes(n);
  std::vector<std::size_t> cluster_of(n);
  {
    const std::size_t base = n / clusters;
    std::size_t remainder = n % clusters;
    std::size_t row = 0;
    std::vector<double> z(k);
    for (std::size_t c = 0; c < clusters; ++c) {
      Matrix mix(k, k);
      for (double& v : mix.values()) v = rng.uniform(-1.0, 1.0);
      const std::size_t vertex = vertex_perm[c];
      const std::size_t count = base + (c < remainder ? 1 : 0);
      for (std::size_t s = 0; s < count; ++s, ++row) {
        for (std::size_t j = 0; j < k; ++j) z[j] = rng.normal();
        double* dst = informative.row(row);
        for (std::size_t j = 0; j < k; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < k; ++i) acc += z[i] * mix(i, j);
          const double corner = (vertex >> j) & 1 ? half_side : -half_side;
          dst[j] = acc + corner;
        }
        classes[row] = static_cast<int>(c / spec.clusters_per_class);
        cluster_of[row] = c;
      }
    }
  }

  // feature layout before the column shuffle: [informative | redundant | noise]
  Matrix features(n, spec.n_features);
  for (std::size_t r = 0; r < n; ++r) {
    const double* inf = informative.row(r);
    double* dst = features.row(r);
    for (std::size_t j = 0; j < k; ++j) dst[j] = inf[j];
    for (std::size_t j = 0; j < spec.n_redundant; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += inf[i] * redundant_mix(i, j);
      dst[k + j] = acc;
    }
  }
  // 4. noise features
  for (std::size_t r = 0; r < n; ++r) {
    double* dst = features.row(r);
    for (std::size_t j = 0; j < spec.n_noise; ++j) {
      dst[k + spec.n_redundant + j] = rng.normal();
    }
  }

  // 5. random class flips
  const double flip_prob = 1.0 - spec.same_class_fraction;
  for (std::size_t r = 0; r < n; ++r) {
    if (rng.uniform() < flip_prob) {
      classes[r] = static_cast<int>(rng.uniform_index(spec.n_classes));
    }
  }

  // 6. shuffle sample order, then feature column order
  const std::vector<std::size_t> row_perm = rng.permutation(n);
  const std::vector<std::size_t> col_perm = rng.permutation(spec.n_features);
  Matrix shuffled(n, spec.n_features);
  std::vector<int> shuffled_classes(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double* src = features.row(row_perm[r]);
    double* dst = shuffled.row(r);
    for (std::size_t c = 0; c < spec.n_features; ++c) dst[c] = src[col_perm[c]];
    shuffled_classes[r] = classes[row_perm[r]];
  }

  // 7. labels from the 2-bit class code
  auto [pub, priv] = derive_labels(shuffled_classes, LabelRule::BitSplit);

  LabeledDataset ds;
  ds.features = std::move(shuffled);
  ds.public_labels = std::move(pub);
  ds.private_labels = std::move(priv);
  ds.provenance = "designer-set";
  ds.generator = "synthetic";
  ds.label_rule = std::string(to_string(LabelRule::BitSplit));
  ds.seed = spec.seed;
  return ds;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
  Prng rng = Prng::substream(spec.seed, "synthetic");
  return generate_synthetic(spec, rng);
}

namespace {

std::uint32_t read_be32(const unsigned char* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::vector<unsigned char> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace

RawDigits load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  const std::vector<unsigned char> img = read_binary_file(images_path);
  const std::vector<unsigned char> lbl = read_binary_file(labels_path);

  if (img.size() < 16) throw ParseError(images_path + ": truncated IDX header");
  if (read_be32(img.data()) != 2051) {
    throw ParseError(images_path + ": bad magic (expected 2051, got " +
                     std::to_string(read_be32(img.data())) + ")");
  }
  const std::size_t n_img = read_be32(img.data() + 4);
  const std::size_t rows = read_be32(img.data() + 8);
  const std::size_t cols = read_be32(img.data() + 12);
  const std::size_t expected_img = 16 + n_img * rows * cols;
  if (img.size() < expected_img) {
    throw ParseError(images_path + ": truncated image data (expected " +
                     std::to_string(expected_img) + " bytes, got " + std::to_string(img.size()) +
                     ")");
  }
  if (img.size() > expected_img) {
    throw ParseError(images_path + ": trailing bytes after image data");
  }

  if (lbl.size() < 8) throw ParseError(labels_path + ": truncated IDX header");
  if (read_be32(lbl.data()) != 2049) {
    throw ParseError(labels_path + ": bad magic (expected 2049, got " +
                     std::to_string(read_be32(lbl.data())) + ")");
  }
  const std::size_t n_lbl = read_be32(lbl.data() + 4);
  if (lbl.size() < 8 + n_lbl) throw ParseError(labels_path + ": truncated label data");
  if (lbl.size() > 8 + n_lbl) throw ParseError(labels_path + ": trailing bytes after label data");

  if (n_img != n_lbl) {
    throw ParseError("image/label count mismatch: " + std::to_string(n_img) + " images vs " +
                     std::to_string(n_lbl) + " labels");
  }

  RawDigits out;
  out.images.reshape(n_img, rows * cols);
  const double scale = 1.0 / 255.0;
  for (std::size_t i = 0; i < n_img; ++i) {
    const unsigned char* src = img.data() + 16 + i * rows * cols;
    double* dst = out.images.row(i);
    for (std::size_t p = 0; p < rows * cols; ++p) dst[p] = static_cast<double>(src[p]) * scale;
  }
  out.digits.resize(n_lbl);
  for (std::size_t i = 0; i < n_lbl; ++i) {
    const unsigned char d = lbl[8 + i];
    if (d > 9) {
      throw ParseError(labels_path + ": label out of range at index " + std::to_string(i));
    }
    out.digits[i] = d;
  }
  return out;
}

std::string_view to_string(LabelRule rule) {
  switch (rule) {
    case LabelRule::BitSplit: return "bit-split";
    case LabelRule::ParityMagnitude: return "parity-magnitude";
  }
  return "?";
}

LabelRule label_rule_from_string(std::string_view name) {
  if (name == "bit-split") return LabelRule::BitSplit;
  if (name == "parity-magnitude") return LabelRule::ParityMagnitude;
  throw ParseError("unknown label rule: " + std::string(name));
}

std::pair<std::vector<int>, std::vector<int>> derive_labels(const std::vector<int>& raw,
                                                            LabelRule rule) {
  std::vector<int> pub(raw.size()), priv(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int v = raw[i];
    switch (rule) {
      case LabelRule::BitSplit:
        if (v < 0 || v > 3) {
          throw UsageError("derive_labels: bit-split needs classes in 0..3, got " +
                           std::to_string(v));
        }
        pub[i] = v & 1;
        priv[i] = (v >> 1) & 1;
        break;
      case LabelRule::ParityMagnitude:
        if (v < 0 || v > 9) {
          throw UsageError("derive_labels: parity-magnitude needs digits in 0..9, got " +
                           std::to_string(v));
        }
        pub[i] = v % 2;
        priv[i] = v > 4 ? 1 : 0;
        break;
    }
  }
  return {std::move(pub), std::move(priv)};
}

namespace {

LabeledDataset gather(const LabeledDataset& src, const std::vector<std::size_t>& idx) {
  LabeledDataset out;
  out.features.reshape(idx.size(), src.dim());
  out.public_labels.resize(idx.size());
  out.private_labels.resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double* s = src.features.row(idx[r]);
    double* d = out.features.row(r);
    std::copy(s, s + src.dim(), d);
    out.public_labels[r] = src.public_labels[idx[r]];
    out.private_labels[r] = src.private_labels[idx[r]];
  }
  out.provenance = src.provenance;
  out.generator = src.generator;
  out.label_rule = src.label_rule;
  out.seed = src.seed;
  return out;
}

}  // namespace

SplitResult split(const LabeledDataset& dataset, double val_fraction, Prng& rng) {
  dataset.validate();
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw UsageError("split: val_fraction must be strictly between 0 and 1");
  }
  const std::size_t n = dataset.size();

  std::map<int, std::vector<std::size_t>> strata;  // key = pub*2 + priv
  for (std::size_t i = 0; i < n; ++i) {
    strata[dataset.public_labels[i] * 2 + dataset.private_labels[i]].push_back(i);
  }
  bool stratified = true;
  for (const auto& [key, members] : strata) {
    if (members.size() < 5) {
      stratified = false;
      break;
    }
  }
  if (!stratified) {
    std::cerr << "warning: a label stratum has fewer than 5 samples; "
              << "falling back to an unstratified split\n";
    strata.clear();
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    strata[0] = std::move(all);
  }

  const std::size_t val_total =
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));

  // Largest-remainder apportionment keeps every stratum's validation count
  // within one sample of its proportional share while hitting val_total.
  std::vector<std::pair<int, std::size_t>> counts;  // (stratum key, val count)
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (const auto& [key, members] : strata) {
    const double ideal = val_fraction * static_cast<double>(members.size());
    const std::size_t floor_count = static_cast<std::size_t>(ideal);
    counts.emplace_back(key, floor_count);
    remainders.emplace_back(ideal - static_cast<double>(floor_count), key);
    assigned += floor_count;
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; assigned < val_total && i < remainders.size(); ++i, ++assigned) {
    for (auto& [key, count] : counts) {
      if (key == remainders[i].second) {
        ++count;
        break;
      }
    }
  }

  std::vector<std::size_t> val_idx;
  for (const auto& [key, count] : counts) {
    std::vector<std::size_t> members = strata[key];
    rng.shuffle(members);
    val_idx.insert(val_idx.end(), members.begin(), members.begin() + count);
  }
  std::sort(val_idx.begin(), val_idx.end());

  std::vector<std::size_t> train_idx;
  train_idx.reserve(n - val_idx.size());
  std::size_t vi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (vi < val_idx.size() && val_idx[vi] == i) {
      ++vi;
    } else {
      train_idx.push_back(i);
    }
  }

  return SplitResult{gather(dataset, train_idx), gather(dataset, val_idx)};
}

void save_dataset(const LabeledDataset& dataset, const std::string& path) {
  dataset.validate();
  std::ostringstream out;
  out << "infoshape.dataset.v1\n";
  out << "n_samples " << dataset.size() << "\n";
  out << "n_features " << dataset.dim() << "\n";
  out << "provenance " << dataset.provenance << "\n";
  out << "generator " << dataset.generator << "\n";
  out << "label_rule " << dataset.label_rule << "\n";
  out << "seed " << dataset.seed << "\n";
  out << "data\n";
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const double* row = dataset.features.row(r);
    for (std::size_t c = 0; c < dataset.dim(); ++c) out << format_double(row[c]) << ' ';
    out << dataset.public_labels[r] << ' ' << dataset.private_labels[r] << "\n";
  }
  write_text_file(path, out.str());
}

LabeledDataset load_dataset(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;

  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw ParseError(path + ": unexpected end of file, expected " + what);
    }
    return line;
  };
  auto header_value = [&](const std::string& key) {
    next_line(key.c_str());
    if (line.size() < key.size() + 1 || line.compare(0, key.size(), key) != 0 ||
        line[key.size()] != ' ') {
      throw ParseError(path + ": expected header line '" + key + " ...', got '" + line + "'");
    }
    return line.substr(key.size() + 1);
  };

  if (next_line("magic") != "infoshape.dataset.v1") {
    throw ParseError(path + ": not an infoshape.dataset.v1 file (got '" + line + "')");
  }
  const long long n = parse_int(header_value("n_samples"));
  const long long d = parse_int(header_value("n_features"));
  if (n < 0 || d <= 0) throw ParseError(path + ": invalid dimensions in header");

  LabeledDataset ds;
  ds.provenance = header_value("provenance");
  ds.generator = header_value("generator");
  ds.label_rule = header_value("label_rule");
  ds.seed = static_cast<std::uint64_t>(parse_int(header_value("seed")));
  if (next_line("data sentinel") != "data") {
    throw ParseError(path + ": expected 'data' sentinel, got '" + line + "'");
  }

  ds.features.reshape(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
  ds.public_labels.resize(n);
  ds.private_labels.resize(n);
  std::string token;
  for (long long r = 0; r < n; ++r) {
    next_line("data row");
    std::istringstream row(line);
    double* dst = ds.features.row(r);
    for (long long c = 0; c < d; ++c) {
      if (!(row >> token)) throw ParseError(path + ": row " + std::to_string(r) + " is short");
      dst[c] = parse_double(token);
    }
    int pub = 0, priv = 0;
    if (!(row >> pub >> priv)) throw ParseError(path + ": row " + std::to_string(r) + " is short");
    if (row >> token) throw ParseError(path + ": row " + std::to_string(r) + " has extra tokens");
    ds.public_labels[r] = pub;
    ds.private_labels[r] = priv;
  }
  ds.validate();
  return ds;
}

LabeledDataset subset_dataset(const LabeledDataset& dataset, std::size_t k, Prng& rng) {
  if (k == 0 || k >= dataset.size()) return dataset;
  std::vector<std::size_t> idx = rng.sample_indices(dataset.size(), k);
  std::sort(idx.begin(), idx.end());
  return gather(dataset, idx);
}

}  // namespace infoshape
