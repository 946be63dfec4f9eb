#include "infoshape/mlp.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "infoshape/error.hpp"

namespace infoshape {

namespace {

void apply_activation(Activation act, const Matrix& pre, Matrix& post) {
  post.reshape(pre.rows(), pre.cols());
  const double* z = pre.data();
  double* a = post.data();
  const std::size_t n = pre.size();
  switch (act) {
    case Activation::Tanh:
      for (std::size_t i = 0; i < n; ++i) a[i] = std::tanh(z[i]);
      break;
    case Activation::ReLU:
      for (std::size_t i = 0; i < n; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) a[i] = 1.0 / (1.0 + std::exp(-z[i]));
      break;
    case Activation::Identity:
      for (std::size_t i = 0; i < n; ++i) a[i] = z[i];
      break;
  }
}

// delta *= act'(z), using pre- or post-activations as convenient.
void apply_activation_grad(Activation act, const Matrix& pre, const Matrix& post, Matrix& delta) {
  double* d = delta.data();
  const double* z = pre.data();
  const double* a = post.data();
  const std::size_t n = delta.size();
  switch (act) {
    case Activation::Tanh:
      for (std::size_t i = 0; i < n; ++i) d[i] *= 1.0 - a[i] * a[i];
      break;
    case Activation::ReLU:
      for (std::size_t i = 0; i < n; ++i) d[i] = z[i] > 0.0 ? d[i] : 0.0;
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) d[i] *= a[i] * (1.0 - a[i]);
      break;
    case Activation::Identity:
      break;
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw ParseError("unknown activation: " + std::string(name));
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

void Mlp::validate() const {
  if (layer_dims.size() < 2) throw ConfigError("Mlp: need at least input and output dims");
  const std::size_t layers = layer_dims.size() - 1;
  if (weights.size() != layers || biases.size() != layers || activations.size() != layers) {
    throw ConfigError("Mlp: layer counts do not match layer_dims");
  }
  for (std::size_t i = 0; i < layers; ++i) {
    if (weights[i].rows() != layer_dims[i + 1] || weights[i].cols() != layer_dims[i]) {
      throw ConfigError("Mlp: weights[" + std::to_string(i) + "] has the wrong shape");
    }
    if (biases[i].size() != layer_dims[i + 1]) {
      throw ConfigError("Mlp: biases[" + std::to_string(i) + "] has the wrong length");
    }
    if (!weights[i].all_finite()) {
      throw ConfigError("Mlp: weights[" + std::to_string(i) + "] contains non-finite values");
    }
    for (double b : biases[i]) {
      if (!std::isfinite(b)) {
        throw ConfigError("Mlp: biases[" + std::to_string(i) + "] contains non-finite values");
      }
    }
  }
}

void forward(const Mlp& net, const Matrix& batch, Matrix& out, ForwardCache* cache) {
  if (batch.cols() != net.input_dim()) {
    throw ConfigError("forward: batch has " + std::to_string(batch.cols()) +
                      " columns, network expects " + std::to_string(net.input_dim()));
  }
  const std::size_t layers = net.num_layers();
  if (cache) {
    cache->input = batch;
    cache->pre.resize(layers);
    cache->post.resize(layers);
  }
  ForwardCache local;
  ForwardCache& ws = cache ? *cache : local;
  if (!cache) {
    ws.pre.resize(layers);
    ws.post.resize(layers);
  }

  const Matrix* current = &batch;
  for (std::size_t i = 0; i < layers; ++i) {
    Matrix& pre = ws.pre[i];
    matmul_nt(*current, net.weights[i], pre);
    const std::vector<double>& b = net.biases[i];
    for (std::size_t r = 0; r < pre.rows(); ++r) {
      double* row = pre.row(r);
      for (std::size_t c = 0; c < pre.cols(); ++c) row[c] += b[c];
    }
    apply_activation(net.activations[i], pre, ws.post[i]);
    current = &ws.post[i];
  }
  out = *current;
}

Matrix forward(const Mlp& net, const Matrix& batch, ForwardCache* cache) {
  Matrix out;
  forward(net, batch, out, cache);
  return out;
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  g.weights.reserve(net.weights.size());
  g.biases.reserve(net.biases.size());
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    g.weights.emplace_back(net.weights[i].rows(), net.weights[i].cols());
    g.biases.emplace_back(net.biases[i].size(), 0.0);
  }
  return g;
}

bool Gradients::all_finite() const {
  for (const auto& w : weights) {
    if (!w.all_finite()) return false;
  }
  for (const auto& b : biases) {
    for (double v : b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void Gradients::scale(double s) {
  for (auto& w : weights) {
    for (double& v : w.values()) v *= s;
  }
  for (auto& b : biases) {
    for (double& v : b) v *= s;
  }
}

void Gradients::add(const Gradients& other) {
  if (other.weights.size() != weights.size()) throw UsageError("Gradients::add: shape mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!same_shape(weights[i], other.weights[i]) || biases[i].size() != other.biases[i].size()) {
      throw UsageError("Gradients::add: shape mismatch");
    }
    for (std::size_t k = 0; k < weights[i].size(); ++k) {
      weights[i].values()[k] += other.weights[i].values()[k];
    }
    for (std::size_t k = 0; k < biases[i].size(); ++k) biases[i][k] += other.biases[i][k];
  }
}

void backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad,
              BackwardResult& out) {
  const std::size_t layers = net.num_layers();
  if (cache.pre.size() != layers || cache.post.size() != layers || cache.input.empty()) {
    throw UsageError("backward: forward cache is missing or does not match the network");
  }
  if (!same_shape(output_grad, cache.post.back())) {
    throw UsageError("backward: output_grad shape does not match forward outputs");
  }

  if (out.grads.weights.size() != layers) out.grads = Gradients::zeros_like(net);

  // delta starts as dLoss/d(post) of the last layer and is walked backwards.
  Matrix delta = output_grad;
  for (std::size_t li = layers; li-- > 0;) {
    apply_activation_grad(net.activations[li], cache.pre[li], cache.post[li], delta);

    const Matrix& layer_in = li == 0 ? cache.input : cache.post[li - 1];
    matmul_tn(delta, layer_in, out.grads.weights[li]);  // (out x batch) * (batch x in)

    std::vector<double>& bg = out.grads.biases[li];
    bg.assign(delta.cols(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const double* row = delta.row(r);
      for (std::size_t c = 0; c < delta.cols(); ++c) bg[c] += row[c];
    }

    if (li == 0) {
      matmul(delta, net.weights[li], out.input_grad);
    } else {
      Matrix next;
      matmul(delta, net.weights[li], next);
      delta = std::move(next);
    }
  }
}

BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad) {
  BackwardResult out;
  backward(net, cache, output_grad, out);
  return out;
}

Mlp init_weights(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations,
                 Prng& rng) {
  if (dims.size() < 2) throw ConfigError("init_weights: need at least input and output dims");
  if (activations.size() != dims.size() - 1) {
    throw ConfigError("init_weights: need one activation per weight layer");
  }
  for (std::size_t d : dims) {
    if (d == 0) throw ConfigError("init_weights: zero-sized layer");
  }
  Mlp net;
  net.layer_dims = dims;
  net.activations = activations;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fan_in = dims[i], fan_out = dims[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

void save_checkpoint(const Mlp& net, const std::string& path, std::string_view preset,
                     std::uint64_t config_hash) {
  net.validate();
  nlohmann::ordered_json j;
  j["format"] = "infoshape.checkpoint";
  j["version"] = 1;
  j["preset"] = std::string(preset);
  j["layer_dims"] = net.layer_dims;
  std::vector<std::string> acts;
  for (Activation a : net.activations) acts.emplace_back(to_string(a));
  j["activations"] = acts;
  nlohmann::ordered_json weights = nlohmann::ordered_json::array();
  nlohmann::ordered_json biases = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    weights.push_back(net.weights[i].values());
    biases.push_back(net.biases[i]);
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  char hex[19];
  std::snprintf(hex, sizeof(hex), "0x%016llx", static_cast<unsigned long long>(config_hash));
  j["config_hash"] = hex;

  std::ofstream out(path);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path + ": " + e.what());
  }
  try {
    if (j.at("format") != "infoshape.checkpoint") {
      throw ParseError("checkpoint " + path + ": unexpected format tag");
    }
    if (j.at("version") != 1) {
      throw ParseError("checkpoint " + path + ": unsupported version");
    }
    Checkpoint ck;
    ck.preset = j.at("preset").get<std::string>();
    ck.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    Mlp& net = ck.net;
    net.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    for (const auto& a : j.at("activations")) {
      net.activations.push_back(activation_from_string(a.get<std::string>()));
    }
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (net.layer_dims.size() < 2 || weights.size() != net.layer_dims.size() - 1 ||
        biases.size() != weights.size()) {
      throw ParseError("checkpoint " + path + ": layer counts do not match dims");
    }
    for (std::size_t i = 0; i + 1 < net.layer_dims.size(); ++i) {
      Matrix w(net.layer_dims[i + 1], net.layer_dims[i]);
      const auto flat = weights[i].get<std::vector<double>>();
      if (flat.size() != w.size()) {
        throw ParseError("checkpoint " + path + ": weights[" + std::to_string(i) +
                         "] has the wrong element count");
      }
      w.values() = flat;
      net.weights.push_back(std::move(w));
      net.biases.push_back(biases[i].get<std::vector<double>>());
    }
    net.validate();
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError("checkpoint " + path + ": " + e.what());
  }
}

}  // namespace infoshape
