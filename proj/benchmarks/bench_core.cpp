#include <benchmark/benchmark.h>

#include "varmeta/adjoint/hessian.hpp"
#include "varmeta/adjoint/tangent_adjoint.hpp"
#include "varmeta/assimilation/fourdvar.hpp"
#include "varmeta/harness/rng.hpp"
#include "varmeta/harness/scenario.hpp"

using namespace varmeta;

namespace {

Grid grid_of(benchmark::State& state) {
  Grid g;
  g.q = static_cast<int>(state.range(0));
  return g;
}

Perturbation noise(int q, std::uint64_t seed) {
  Rng rng(seed);
  return Perturbation(q, 1e-3 * rng.normal_vector(3 * q * q));
}

const Scenario& full_scenario() {
  static const Scenario s = make_scenario(ExperimentConfig{}, ScenarioName::obs_weights);
  return s;
}

}  // namespace

static void BM_Step(benchmark::State& state) {
  const Grid g = grid_of(state);
  StateVector x = gaussian_bell_initial(g, 10.0, 1.5, 1.0);
  const ModelParams p;
  for (auto _ : state) {
    x = step(x, g, p);
    benchmark::DoNotOptimize(x.values().data());
  }
  state.SetItemsProcessed(state.iterations() * g.cells());
}
BENCHMARK(BM_Step)->Arg(20)->Arg(40)->Arg(80);

static void BM_TlmSweep(benchmark::State& state) {
  const Grid g = grid_of(state);
  const Trajectory t = integrate(gaussian_bell_initial(g, 10.0, 1.5, 1.0), g, ModelParams{});
  const Perturbation d = noise(g.q, 1);
  for (auto _ : state) benchmark::DoNotOptimize(tlm_propagate(t, d, t.steps()));
}
BENCHMARK(BM_TlmSweep)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_AdjointSweep(benchmark::State& state) {
  const Grid g = grid_of(state);
  const Trajectory t = integrate(gaussian_bell_initial(g, 10.0, 1.5, 1.0), g, ModelParams{});
  const AdjointVariable l(g.q, noise(g.q, 2).values());
  for (auto _ : state) benchmark::DoNotOptimize(adj_propagate(t, l, t.steps()));
}
BENCHMARK(BM_AdjointSweep)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_CostAndGradient(benchmark::State& state) {
  const AssimilationProblem& p = full_scenario().meta.inner;
  const StateVector x = displaced(p.background(), noise(p.grid().q, 3));
  Perturbation g(p.grid().q);
  for (auto _ : state) benchmark::DoNotOptimize(cost_and_grad_4dvar(p, x, g));
}
BENCHMARK(BM_CostAndGradient)->Unit(benchmark::kMillisecond);

static void BM_GaussNewtonHessianVector(benchmark::State& state) {
  const AssimilationProblem& p = full_scenario().meta.inner;
  const Perturbation v = noise(p.grid().q, 4);
  for (auto _ : state) benchmark::DoNotOptimize(hessian_vector(p, p.background(), v));
}
BENCHMARK(BM_GaussNewtonHessianVector)->Unit(benchmark::kMillisecond);

static void BM_BackgroundInverse(benchmark::State& state) {
  const AssimilationProblem& p = full_scenario().meta.inner;
  const Perturbation v = noise(p.grid().q, 5);
  for (auto _ : state) benchmark::DoNotOptimize(p.b_cov().apply_binv(v));
}
BENCHMARK(BM_BackgroundInverse)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
