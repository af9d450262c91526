#include <benchmark/benchmark.h>

#include "fedspar/estimators.hpp"
#include "fedspar/inference.hpp"
#include "fedspar/model.hpp"
#include "fedspar/privacy.hpp"
#include "fedspar/untrusted_mean.hpp"

namespace {

using namespace fedspar;

void BM_NoisyHardThreshold(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int s = static_cast<int>(state.range(1));
  Rng rng(7, 1);
  Eigen::VectorXd v(d);
  for (int j = 0; j < d; ++j) v[j] = rng.gaussian();
  PrivacyBudget budget(0.5, 1e-5);
  for (auto _ : state) {
    auto out = noisy_hard_threshold(v, s, 0.01, budget, rng);
    benchmark::DoNotOptimize(out.value);
  }
}
BENCHMARK(BM_NoisyHardThreshold)->Args({200, 10})->Args({1000, 20})->Args({4000, 40});

struct FixtureData {
  TrueModel model;
  std::vector<MachineDataset> data;
  HyperParams hyper;

  FixtureData(int n, int m, int d, int s_star, int s0) {
    Rng rng(11, 0);
    model = make_true_model(m, d, s_star, s0, 0.5, ar_covariance(d, 0.5), rng);
    Rng data_rng = rng.substream(1);
    data = sample_federation(model, n, data_rng);
    hyper = HyperParams::make({n, m, d}, s_star, s0, 0.5,
                              PrivacyBudget(0.8, 1.0 / (2.0 * m * n)));
    hyper.eta = 0.08;
  }
};

void BM_RegressionRound(benchmark::State& state) {
  FixtureData fx(500, 5, 100, 5, 2);
  HyperParams hyper = fx.hyper;
  hyper.T = 1;
  for (auto _ : state) {
    FederatedRun run(fx.data, Rng(3, 9));
    auto est = fed_sparse_regression(run, hyper);
    benchmark::DoNotOptimize(est.beta_hat);
  }
}
BENCHMARK(BM_RegressionRound);

void BM_BootstrapIteration(benchmark::State& state) {
  FixtureData fx(500, 5, 100, 5, 2);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(100, 100);
  std::vector<int> G(100);
  for (int j = 0; j < 100; ++j) G[j] = j;
  for (auto _ : state) {
    FederatedRun run(fx.data, Rng(4, 2));
    auto boot = bootstrap_simultaneous(run, theta, fx.hyper, G, 1, 0.95);
    benchmark::DoNotOptimize(boot.c_u);
  }
}
BENCHMARK(BM_BootstrapIteration);

void BM_SignReport(benchmark::State& state) {
  const int n = 16, d = 32;
  Rng rng(5, 5);
  MachineDataset ds;
  ds.machine_id = 0;
  ds.X.resize(n, d);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) ds.X(r, c) = rng.gaussian();
  }
  ds.y = Eigen::VectorXd::Zero(n);
  SignReportConfig cfg;
  cfg.epsilon = 1.0;
  for (auto _ : state) {
    auto report = local_sign_report(ds, cfg, rng);
    benchmark::DoNotOptimize(report.value);
  }
}
BENCHMARK(BM_SignReport);

}  // namespace

BENCHMARK_MAIN();
