#include <benchmark/benchmark.h>

#include "infoshape/dataset.hpp"
#include "infoshape/evaluation.hpp"
#include "infoshape/matrix.hpp"
#include "infoshape/mi.hpp"
#include "infoshape/mlp.hpp"
#include "infoshape/prng.hpp"

using namespace infoshape;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Prng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

// The shape that dominates MI-estimator training: a stacked 2x2000-row batch
// against the 100x100 hidden layer.
void BM_GemmEstimatorShape(benchmark::State& state) {
  const Matrix x = random_matrix(4000, 100, 1);
  const Matrix w = random_matrix(100, 100, 2);
  Matrix out;
  for (auto _ : state) {
    matmul_nt(x, w, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 4000 * 100 * 100 * 2);
}
BENCHMARK(BM_GemmEstimatorShape);

void BM_MiCriticForwardBackward(benchmark::State& state) {
  MIEstimatorConfig cfg;
  Prng rng(3);
  const MIEstimatorNet net = make_mi_estimator_net(3, cfg, rng);
  const Matrix batch = random_matrix(4000, 4, 4);
  ForwardCache cache;
  Matrix out;
  Matrix output_grad(4000, 1, 1.0 / 4000);
  BackwardResult bwd;
  for (auto _ : state) {
    forward(net.net, batch, out, &cache);
    backward(net.net, cache, output_grad, bwd);
    benchmark::DoNotOptimize(bwd.grads.weights.data());
  }
}
BENCHMARK(BM_MiCriticForwardBackward);

void BM_MiTrainingIteration(benchmark::State& state) {
  // One full estimator schedule on a small iteration count, normalized per
  // iteration: covers sampling, permutation, forward, backward, Adam.
  Prng data_rng(5);
  const std::size_t n = 8000;
  PairedBatch samples;
  samples.alpha = random_matrix(n, 3, 6);
  samples.beta.resize(n);
  for (std::size_t i = 0; i < n; ++i) samples.beta[i] = data_rng.uniform() < 0.5;
  MIEstimatorConfig cfg;
  cfg.iterations = 20;
  for (auto _ : state) {
    Prng rng(7);
    const MIEstimate est = train_mi_estimator(samples, cfg, rng);
    benchmark::DoNotOptimize(est.final_estimate);
  }
  state.SetItemsProcessed(state.iterations() * cfg.iterations);
}
BENCHMARK(BM_MiTrainingIteration)->Unit(benchmark::kMillisecond);

void BM_SyntheticGeneration(benchmark::State& state) {
  SyntheticSpec spec;
  spec.seed = 8;
  for (auto _ : state) {
    const LabeledDataset ds = generate_synthetic(spec);
    benchmark::DoNotOptimize(ds.features.data());
  }
  state.SetItemsProcessed(state.iterations() * spec.n_samples);
}
BENCHMARK(BM_SyntheticGeneration)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Prng rng(9);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = i % 2;
  }
  for (auto _ : state) {
    const RocReport rep = roc_auc(scores, labels);
    benchmark::DoNotOptimize(rep.auc);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
