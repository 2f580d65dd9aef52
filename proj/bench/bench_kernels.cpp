// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "tvinfer/inference.hpp"
#include "tvinfer/simulate.hpp"

namespace {

using namespace tvinfer;

struct NullFixture {
  RidgeCovariance cov;
  NormalBank bank;
};

NullFixture make_null_fixture(Index p, Index m, Index draws) {
  const Matrix X = gen_design(200, p, DesignSpec{}, 7);
  const Vector y = Vector::Zero(200);
  const Dataset data(X, y);
  const LocalDesign design = svd_projection(build_local_design(data, kernel_weights({KernelKind::uniform, m / 400.0}, 0.5, 200)));
  RidgeCovariance cov = ridge_covariance(design, Matrix::Identity(design.local_size(), design.local_size()), 1.0 / 200);
  NormalBank bank(11, cov.factor.cols(), draws);
  return {std::move(cov), std::move(bank)};
}

void BM_null_serial(benchmark::State& state) {
  const auto fx = make_null_fixture(state.range(0), 80, 20000);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_null_distribution_serial(fx.cov, fx.bank));
}

void BM_null_parallel(benchmark::State& state) {
  const auto fx = make_null_fixture(state.range(0), 80, 20000);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_null_distribution(fx.cov, fx.bank));
}

SimulatedData path_data() {
  SimulationConfig cfg;
  cfg.n = 200;
  cfg.p = 50;
  return simulate_dataset(cfg, 0);
}

PipelineConfig path_config() {
  PipelineConfig pc;
  pc.error_model = IidKnown{1.0};
  pc.lambda1 = LambdaRule::fixed_value(0.1);
  pc.inference.n_mc = 5000;
  return pc;
}

void BM_path_serial(benchmark::State& state) {
  const auto sim = path_data();
  const auto grid = interior_grid(KernelSpec{}, sim.data.n());
  const auto pc = path_config();
  for (auto _ : state) benchmark::DoNotOptimize(infer_path_serial(sim.data, grid, pc));
}

void BM_path_parallel(benchmark::State& state) {
  const auto sim = path_data();
  const auto grid = interior_grid(KernelSpec{}, sim.data.n());
  const auto pc = path_config();
  for (auto _ : state) benchmark::DoNotOptimize(infer_path(sim.data, grid, pc));
}

SimulationConfig sim_config() {
  SimulationConfig cfg;
  cfg.n = 100;
  cfg.p = 30;
  cfg.replications = 4;
  cfg.n_mc = 2000;
  cfg.lambda1 = LambdaRule::fixed_value(0.2);
  return cfg;
}

void BM_simulation_serial(benchmark::State& state) {
  const auto cfg = sim_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation_serial(cfg));
}

void BM_simulation_parallel(benchmark::State& state) {
  const auto cfg = sim_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(cfg));
}

}  // namespace

BENCHMARK(BM_null_serial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_null_parallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_path_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_path_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_simulation_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_simulation_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
