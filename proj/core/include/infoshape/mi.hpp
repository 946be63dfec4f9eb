#pragma once

#include <cstdint>
#include <vector>

#include "infoshape/matrix.hpp"
#include "infoshape/mlp.hpp"
#include "infoshape/prng.hpp"

namespace infoshape {

/// A batch of (alpha, beta) pairs: alpha rows are sample vectors (raw or
/// encoded), beta holds one scalar per row. For label MI the betas are 0/1;
/// the estimator itself accepts any real-valued beta.
struct PairedBatch {
  Matrix alpha;
  std::vector<double> beta;

  std::size_t size() const { return alpha.rows(); }
  std::size_t dim() const { return alpha.cols(); }
  void validate() const;  // rows >= 2, lengths match; throws UsageError
};

/// Training schedule for one neural MI estimator.
struct MIEstimatorConfig {
  std::size_t iterations = 2000;
  double lr = 1e-4;
  std::size_t batch_size = 2000;
  std::size_t accumulation_window = 10;   // optimizer steps once per window
  double reg_coefficient = 0.1;           // weight of the (log-mean-exp)^2 penalty
  double final_average_fraction = 0.1;    // final estimate averages this tail of the trace
  std::vector<std::size_t> hidden_dims = {100, 100};
  double divergence_cap = 50.0;           // abort when |estimate| exceeds this (nats)
  std::size_t smoothing_window = 50;      // reporting only, never feeds training

  void validate() const;
};

/// Critic network scoring (alpha, beta) pairs: input dim = dim(alpha) + 1,
/// hidden ReLU layers per config, one Identity output.
struct MIEstimatorNet {
  Mlp net;
};

MIEstimatorNet make_mi_estimator_net(std::size_t alpha_dim, const MIEstimatorConfig& config,
                                     Prng& rng);

/// Per-iteration history of raw estimates (nats).
struct MITrace {
  std::vector<double> raw;
  std::size_t smoothing_window = 50;

  std::vector<double> smoothed() const;
};

/// Product-of-marginals batch: alpha is kept bit-exact, beta is replaced by a
/// uniformly random permutation of itself (the multiset is preserved).
PairedBatch sample_product_batch(const PairedBatch& joint, Prng& rng);

/// log((1/n) * sum(exp(x_i))), computed with a max shift so |x| up to ~700
/// cannot overflow.
double logmeanexp(const std::vector<double>& xs);

/// Donsker-Varadhan estimate: mean of F over the joint batch minus
/// logmeanexp of F over the product batch. Nats.
double dv_objective(const MIEstimatorNet& net, const PairedBatch& joint,
                    const PairedBatch& product);

struct RemineValue {
  double loss;                 // what gradient descent minimizes
  double dv_estimate;          // unpenalized DV value (nats)
  double logmeanexp_product;   // the penalized quantity
};

/// Regularized training objective: maximize dv - reg * logmeanexp^2; the
/// returned loss is its negation.
RemineValue remine_training_objective(const MIEstimatorNet& net, const PairedBatch& joint,
                                      const PairedBatch& product, double reg_coefficient);

struct MIEstimate {
  MIEstimatorNet net;
  MITrace trace;
  double final_estimate = 0.0;  // mean of the raw trace over its final window
};

/// Trains a fresh estimator (or continues from *warm_start) on minibatches
/// drawn from `samples`. Each iteration draws a joint batch and permutes its
/// betas for the product term. Per-iteration gradients enter a rolling
/// window of length accumulation_window; once the window is full, every
/// iteration applies one Adam step on the window average (updates start only
/// after accumulating a full window). Throws TrainingError (with the partial
/// trace attached) when the estimate diverges.
MIEstimate train_mi_estimator(const PairedBatch& samples, const MIEstimatorConfig& config,
                              Prng& rng, const MIEstimatorNet* warm_start = nullptr);

/// Exact MI of a finite joint pmf (rows = alpha values, cols = beta values),
/// in nats; 0 * log(0/..) counts as 0. Throws UsageError when entries are
/// negative or do not sum to 1 within 1e-9.
double exact_discrete_mi(const Matrix& joint_pmf);

/// Closed-form MI of a bivariate Gaussian with correlation rho:
/// -0.5 * ln(1 - rho^2). Throws UsageError when |rho| >= 1.
double gaussian_mi_oracle(double rho);

/// Trailing moving average over min(window, index + 1) points.
std::vector<double> smooth_trace(const std::vector<double>& trace, std::size_t window);

}  // namespace infoshape
