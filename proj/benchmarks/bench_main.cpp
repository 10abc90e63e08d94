// Microbenchmarks for the hot paths: simplex projections, the dual prox,
// one client's corrected local update, and a full communication round.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "scaffpd/dual_geometry.hpp"
#include "scaffpd/federation.hpp"
#include "scaffpd/local_solver.hpp"
#include "scaffpd/rng.hpp"
#include "scaffpd/schedule.hpp"
#include "scaffpd/solver.hpp"

namespace {

using namespace scaffpd;

Eigen::VectorXd random_vector(RngStream& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

SynthConfig bench_synth() {
  SynthConfig c;
  c.n_clients = 20;
  c.dim = 50;
  c.m_per_client = 200;
  c.concept_shift_sigma = 0.1;
  c.base_scale = 1.0;
  c.ridge = 0.1;
  c.seed = 42;
  return c;
}

void BM_ProjectSimplex(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(99, 0, 0, 0);
  std::vector<Eigen::VectorXd> inputs;
  for (int k = 0; k < 64; ++k) inputs.push_back(random_vector(rng, n));
  size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_simplex(inputs[k++ & 63]));
  }
}
BENCHMARK(BM_ProjectSimplex)->Arg(8)->Arg(64)->Arg(512);

void BM_DualProx(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto geom = DualGeometry::chi2(n, 0.1);
  RngStream rng(99, 1, 0, 0);
  const Eigen::VectorXd lambda = geom.uniform_weights();
  std::vector<Eigen::VectorXd> inputs;
  for (int k = 0; k < 64; ++k) inputs.push_back(random_vector(rng, n));
  size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_prox(geom, lambda, inputs[k++ & 63], 0.5));
  }
}
BENCHMARK(BM_DualProx)->Arg(8)->Arg(64)->Arg(512);

void BM_LocalUpdate(benchmark::State& state) {
  const Federation fed = generate_synthetic(bench_synth());
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(fed.dimension);
  const Eigen::VectorXd g = local_gradient_deterministic(fed.clients[0], x);
  LocalUpdateParams params;
  params.steps = 100;
  params.eta_local = 0.001;
  std::uint64_t round = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        local_update(fed, 0, x, g, g, params, round++));
  }
}
BENCHMARK(BM_LocalUpdate);

void BM_FullRound(benchmark::State& state) {
  const Federation fed = generate_synthetic(bench_synth());
  const auto geom = DualGeometry::chi2(fed.size(), 0.1);
  const ScheduleState sched = manual_schedule(0.05, 0.5, 0.9);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(fed.dimension);
  const Eigen::VectorXd lambda0 = geom.uniform_weights();
  RunOptions options;
  options.parallel_clients = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_scaffpd(fed, geom, 20, 1.0, sched, x0, lambda0, 1, options));
  }
}
BENCHMARK(BM_FullRound)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
