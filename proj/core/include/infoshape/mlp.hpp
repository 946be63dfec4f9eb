#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "infoshape/matrix.hpp"
#include "infoshape/prng.hpp"

namespace infoshape {

enum class Activation { Tanh, ReLU, Sigmoid, Identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Dense feed-forward network. weights[i] maps layer i to layer i+1 and has
/// shape layer_dims[i+1] x layer_dims[i]; biases[i] has layer_dims[i+1]
/// entries; activations[i] is applied after the affine map of layer i.
struct Mlp {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::vector<Activation> activations;

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t num_layers() const { return weights.size(); }
  std::size_t param_count() const;

  /// Checks the shape invariants; throws ConfigError on violation.
  void validate() const;

  bool operator==(const Mlp&) const = default;
};

/// Per-layer pre/post activations for one batch, as left by forward(). Reused
/// across iterations (buffers keep their capacity).
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
};

/// Runs the batch (rows = samples) through the network and returns the output
/// activations. When `cache` is given it is filled with everything backward()
/// needs. Throws ConfigError when batch.cols() != input_dim.
Matrix forward(const Mlp& net, const Matrix& batch, ForwardCache* cache = nullptr);
void forward(const Mlp& net, const Matrix& batch, Matrix& out, ForwardCache* cache);

/// Gradient container shaped exactly like the parameters of an Mlp.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const Mlp& net);
  bool all_finite() const;
  void scale(double s);
  void add(const Gradients& other);  // elementwise; shapes must match
};

struct BackwardResult {
  Gradients grads;
  Matrix input_grad;
};

/// Reverse-mode pass. `output_grad` is dLoss/d(outputs) with the shape of the
/// forward outputs; returns parameter gradients plus dLoss/d(input batch).
/// Throws UsageError when the cache does not match the network or the
/// output_grad shape is wrong.
BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad);
void backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad,
              BackwardResult& out);

/// Fresh network with uniform Glorot-style weights, w ~ U(+-sqrt(6/(fan_in +
/// fan_out))), and zero biases. Deterministic in the rng stream.
Mlp init_weights(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations,
                 Prng& rng);

// ---------------------------------------------------------------------------
// Checkpoint file: a versioned JSON container holding, in this order: format,
// version, preset tag, layer_dims, activations, flattened row-major weights
// (one array per layer), biases (one array per layer), and the config hash.
// Doubles round-trip exactly, so save followed by load is bitwise lossless.
// ---------------------------------------------------------------------------
struct Checkpoint {
  Mlp net;
  std::string preset;
  std::uint64_t config_hash = 0;
};

void save_checkpoint(const Mlp& net, const std::string& path, std::string_view preset,
                     std::uint64_t config_hash);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace infoshape
