#include "infoshape/optim.hpp"

#include <cmath>
#include <string>

#include "infoshape/error.hpp"

namespace infoshape {

namespace {

void check_shapes(const Mlp& net, const Gradients& grads, const char* what) {
  if (grads.weights.size() != net.weights.size() || grads.biases.size() != net.biases.size()) {
    throw UsageError(std::string(what) + ": gradient layer count does not match the network");
  }
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    if (!same_shape(grads.weights[i], net.weights[i]) ||
        grads.biases[i].size() != net.biases[i].size()) {
      throw UsageError(std::string(what) + ": gradient shapes do not match the network");
    }
  }
}

void check_finite(const Gradients& grads, const char* what) {
  for (std::size_t i = 0; i < grads.weights.size(); ++i) {
    const auto& w = grads.weights[i].values();
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (!std::isfinite(w[k])) {
        throw TrainingError(std::string(what) + ": non-finite weight gradient at layer " +
                            std::to_string(i) + ", element " + std::to_string(k) + " (" +
                            std::to_string(w[k]) + ")");
      }
    }
    for (std::size_t k = 0; k < grads.biases[i].size(); ++k) {
      if (!std::isfinite(grads.biases[i][k])) {
        throw TrainingError(std::string(what) + ": non-finite bias gradient at layer " +
                            std::to_string(i) + ", element " + std::to_string(k));
      }
    }
  }
}

}  // namespace

AdamState AdamState::init(const Mlp& net, AdamConfig config) {
  AdamState s;
  s.config = config;
  s.m = Gradients::zeros_like(net);
  s.v = Gradients::zeros_like(net);
  return s;
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  check_shapes(net, grads, "adam_step");
  check_finite(grads, "adam_step");
  state.t += 1;
  const AdamConfig& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));

  auto update = [&](double& theta, double g, double& m, double& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    theta -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  };

  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    auto& w = net.weights[i].values();
    const auto& g = grads.weights[i].values();
    auto& m = state.m.weights[i].values();
    auto& v = state.v.weights[i].values();
    for (std::size_t k = 0; k < w.size(); ++k) update(w[k], g[k], m[k], v[k]);

    auto& b = net.biases[i];
    const auto& gb = grads.biases[i];
    auto& mb = state.m.biases[i];
    auto& vb = state.v.biases[i];
    for (std::size_t k = 0; k < b.size(); ++k) update(b[k], gb[k], mb[k], vb[k]);
  }
}

void sgd_step(Mlp& net, const Gradients& grads, double lr) {
  check_shapes(net, grads, "sgd_step");
  check_finite(grads, "sgd_step");
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    auto& w = net.weights[i].values();
    const auto& g = grads.weights[i].values();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * g[k];
    auto& b = net.biases[i];
    const auto& gb = grads.biases[i];
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= lr * gb[k];
  }
}

Gradients accumulate_grads(const std::vector<Gradients>& grad_list) {
  if (grad_list.empty()) throw UsageError("accumulate_grads: empty gradient list");
  Gradients mean = grad_list.front();
  for (std::size_t i = 1; i < grad_list.size(); ++i) mean.add(grad_list[i]);
  mean.scale(1.0 / static_cast<double>(grad_list.size()));
  return mean;
}

}  // namespace infoshape
