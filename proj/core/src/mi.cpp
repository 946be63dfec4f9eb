#include "infoshape/mi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infoshape/error.hpp"
#include "infoshape/optim.hpp"

namespace infoshape {

namespace {

// Scores a paired batch with the critic: inputs are rows [alpha_i, beta_i].
std::vector<double> critic_scores(const MIEstimatorNet& net, const PairedBatch& batch) {
  Matrix input(batch.size(), batch.dim() + 1);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    double* dst = input.row(r);
    const double* src = batch.alpha.row(r);
    for (std::size_t c = 0; c < batch.dim(); ++c) dst[c] = src[c];
    dst[batch.dim()] = batch.beta[r];
  }
  Matrix out = forward(net.net, input);
  std::vector<double> scores(out.values());
  for (double s : scores) {
    if (!std::isfinite(s)) throw TrainingError("MI critic produced a non-finite score");
  }
  return scores;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

void PairedBatch::validate() const {
  if (alpha.rows() != beta.size()) {
    throw UsageError("PairedBatch: alpha rows (" + std::to_string(alpha.rows()) +
                     ") != beta length (" + std::to_string(beta.size()) + ")");
  }
  if (alpha.rows() < 2) throw UsageError("PairedBatch: need at least 2 rows");
}

void MIEstimatorConfig::validate() const {
  if (iterations == 0) throw ConfigError("MIEstimatorConfig: iterations must be positive");
  if (lr <= 0) throw ConfigError("MIEstimatorConfig: lr must be positive");
  if (batch_size < 2) throw ConfigError("MIEstimatorConfig: batch_size must be at least 2");
  if (accumulation_window == 0) {
    throw ConfigError("MIEstimatorConfig: accumulation_window must be positive");
  }
  if (reg_coefficient < 0) throw ConfigError("MIEstimatorConfig: reg_coefficient must be >= 0");
  if (final_average_fraction <= 0 || final_average_fraction > 1) {
    throw ConfigError("MIEstimatorConfig: final_average_fraction must be in (0, 1]");
  }
  if (hidden_dims.empty()) throw ConfigError("MIEstimatorConfig: need at least one hidden layer");
  if (divergence_cap <= 0) throw ConfigError("MIEstimatorConfig: divergence_cap must be positive");
}

MIEstimatorNet make_mi_estimator_net(std::size_t alpha_dim, const MIEstimatorConfig& config,
                                     Prng& rng) {
  std::vector<std::size_t> dims;
  dims.push_back(alpha_dim + 1);
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(1);
  std::vector<Activation> acts(config.hidden_dims.size(), Activation::ReLU);
  acts.push_back(Activation::Identity);
  return MIEstimatorNet{init_weights(dims, acts, rng)};
}

std::vector<double> MITrace::smoothed() const { return smooth_trace(raw, smoothing_window); }

PairedBatch sample_product_batch(const PairedBatch& joint, Prng& rng) {
  joint.validate();
  PairedBatch product;
  product.alpha = joint.alpha;
  product.beta = joint.beta;
  rng.shuffle(product.beta);
  return product;
}

double logmeanexp(const std::vector<double>& xs) {
  if (xs.empty()) throw UsageError("logmeanexp: empty input");
  const double max = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - max);
  return max + std::log(s / static_cast<double>(xs.size()));
}

double dv_objective(const MIEstimatorNet& net, const PairedBatch& joint,
                    const PairedBatch& product) {
  joint.validate();
  product.validate();
  if (joint.size() != product.size() || joint.dim() != product.dim()) {
    throw UsageError("dv_objective: joint and product batches must have the same shape");
  }
  const std::vector<double> f_joint = critic_scores(net, joint);
  const std::vector<double> f_prod = critic_scores(net, product);
  return mean(f_joint) - logmeanexp(f_prod);
}

RemineValue remine_training_objective(const MIEstimatorNet& net, const PairedBatch& joint,
                                      const PairedBatch& product, double reg_coefficient) {
  joint.validate();
  product.validate();
  if (joint.size() != product.size() || joint.dim() != product.dim()) {
    throw UsageError("remine_training_objective: batch shapes must match");
  }
  const std::vector<double> f_joint = critic_scores(net, joint);
  const std::vector<double> f_prod = critic_scores(net, product);
  const double lme = logmeanexp(f_prod);
  RemineValue v;
  v.logmeanexp_product = lme;
  v.dv_estimate = mean(f_joint) - lme;
  v.loss = -(v.dv_estimate - reg_coefficient * lme * lme);
  return v;
}

MIEstimate train_mi_estimator(const PairedBatch& samples, const MIEstimatorConfig& config,
                              Prng& rng, const MIEstimatorNet* warm_start) {
  samples.validate();
  config.validate();
  const std::size_t n = samples.size();
  const std::size_t d = samples.dim();
  const std::size_t batch = config.batch_size;

  MIEstimatorNet est = warm_start ? *warm_start : make_mi_estimator_net(d, config, rng);
  if (est.net.input_dim() != d + 1) {
    throw ConfigError("train_mi_estimator: warm-start net expects alpha dim " +
                      std::to_string(est.net.input_dim() - 1) + ", samples have " +
                      std::to_string(d));
  }
  AdamState adam = AdamState::init(est.net, AdamConfig{.lr = config.lr});

  MITrace trace;
  trace.raw.reserve(config.iterations);
  trace.smoothing_window = config.smoothing_window;

  // Stacked input: rows [0, batch) are the joint minibatch, rows
  // [batch, 2*batch) the product minibatch (same alphas, permuted betas).
  Matrix input(2 * batch, d + 1);
  Matrix scores;
  Matrix output_grad(2 * batch, 1);
  ForwardCache cache;
  BackwardResult bwd;
  std::vector<double> softmax(batch);
  // Rolling window of the most recent per-iteration gradients. No update is
  // applied until a full window has accumulated; afterwards every iteration
  // applies one Adam step on the window average.
  std::vector<Gradients> window;
  window.reserve(config.accumulation_window);
  std::size_t window_next = 0;

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const std::vector<std::size_t> idx = rng.sample_indices(n, batch);
    const std::vector<std::size_t> perm = rng.permutation(batch);
    for (std::size_t r = 0; r < batch; ++r) {
      const double* src = samples.alpha.row(idx[r]);
      double* joint_row = input.row(r);
      double* prod_row = input.row(batch + r);
      for (std::size_t c = 0; c < d; ++c) {
        joint_row[c] = src[c];
        prod_row[c] = src[c];
      }
      joint_row[d] = samples.beta[idx[r]];
      prod_row[d] = samples.beta[idx[perm[r]]];
    }

    forward(est.net, input, scores, &cache);

    double joint_mean = 0.0;
    for (std::size_t r = 0; r < batch; ++r) joint_mean += scores(r, 0);
    joint_mean /= static_cast<double>(batch);

    double f_max = scores(batch, 0);
    for (std::size_t r = 1; r < batch; ++r) f_max = std::max(f_max, scores(batch + r, 0));
    double exp_sum = 0.0;
    for (std::size_t r = 0; r < batch; ++r) {
      softmax[r] = std::exp(scores(batch + r, 0) - f_max);
      exp_sum += softmax[r];
    }
    const double lme = f_max + std::log(exp_sum / static_cast<double>(batch));
    const double estimate = joint_mean - lme;

    trace.raw.push_back(estimate);
    if (!std::isfinite(estimate) || std::abs(estimate) > config.divergence_cap) {
      throw TrainingError("MI estimator diverged at iteration " + std::to_string(it) +
                              " (estimate " + std::to_string(estimate) + " nats)",
                          trace.raw);
    }

    // loss = -(dv - reg * lme^2):
    //   d loss / d F_joint_i = -1/batch
    //   d loss / d F_prod_i  = (1 + 2 * reg * lme) * softmax_i
    const double joint_coeff = -1.0 / static_cast<double>(batch);
    const double prod_scale = 1.0 + 2.0 * config.reg_coefficient * lme;
    for (std::size_t r = 0; r < batch; ++r) {
      output_grad(r, 0) = joint_coeff;
      output_grad(batch + r, 0) = prod_scale * softmax[r] / exp_sum;
    }

    backward(est.net, cache, output_grad, bwd);
    if (window.size() < config.accumulation_window) {
      window.push_back(bwd.grads);
    } else {
      window[window_next] = bwd.grads;
      window_next = (window_next + 1) % config.accumulation_window;
    }
    if (window.size() == config.accumulation_window) {
      adam_step(est.net, accumulate_grads(window), adam);
    }
  }

  const std::size_t tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(config.final_average_fraction * static_cast<double>(config.iterations))));
  double final_sum = 0.0;
  for (std::size_t i = trace.raw.size() - tail; i < trace.raw.size(); ++i) {
    final_sum += trace.raw[i];
  }

  MIEstimate out;
  out.net = std::move(est);
  out.trace = std::move(trace);
  out.final_estimate = final_sum / static_cast<double>(tail);
  return out;
}

double exact_discrete_mi(const Matrix& joint_pmf) {
  if (joint_pmf.rows() == 0 || joint_pmf.cols() == 0) {
    throw UsageError("exact_discrete_mi: empty pmf");
  }
  double total = 0.0;
  for (double p : joint_pmf.values()) {
    if (!(p >= 0.0)) throw UsageError("exact_discrete_mi: pmf entries must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw UsageError("exact_discrete_mi: pmf sums to " + std::to_string(total) + ", expected 1");
  }
  std::vector<double> pa(joint_pmf.rows(), 0.0), pb(joint_pmf.cols(), 0.0);
  for (std::size_t a = 0; a < joint_pmf.rows(); ++a) {
    for (std::size_t b = 0; b < joint_pmf.cols(); ++b) {
      pa[a] += joint_pmf(a, b);
      pb[b] += joint_pmf(a, b);
    }
  }
  double mi = 0.0;
  for (std::size_t a = 0; a < joint_pmf.rows(); ++a) {
    for (std::size_t b = 0; b < joint_pmf.cols(); ++b) {
      const double p = joint_pmf(a, b);
      if (p > 0.0) mi += p * std::log(p / (pa[a] * pb[b]));
    }
  }
  return mi;
}

double gaussian_mi_oracle(double rho) {
  if (!(std::abs(rho) < 1.0)) throw UsageError("gaussian_mi_oracle: |rho| must be < 1");
  return -0.5 * std::log1p(-rho * rho);
}

std::vector<double> smooth_trace(const std::vector<double>& trace, std::size_t window) {
  if (window == 0) throw UsageError("smooth_trace: window must be >= 1");
  std::vector<double> out(trace.size());
  double running = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    running += trace[i];
    if (i >= window) running -= trace[i - window];
    const std::size_t span = std::min(window, i + 1);
    out[i] = running / static_cast<double>(span);
  }
  return out;
}

}  // namespace infoshape
