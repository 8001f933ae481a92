#include <benchmark/benchmark.h>

#include "kspattern/grid.hpp"
#include "kspattern/simulator.hpp"

namespace ks = kspattern;

namespace {

ks::grid_spec square(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return {n, n, 1.0};
}

void BM_Laplacian(benchmark::State& state) {
  const auto g = square(state);
  const auto [u, v] = ks::initial_condition(g, 42);
  for (auto _ : state) {
    auto lap = ks::laplacian(u);
    benchmark::DoNotOptimize(lap.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_Laplacian)->Arg(64)->Arg(100)->Arg(256);

void BM_ChemotaxisTerm(benchmark::State& state) {
  const auto g = square(state);
  const auto [u, v] = ks::initial_condition(g, 42);
  for (auto _ : state) {
    auto term = ks::chemotaxis_term(u, v, 10.0);
    benchmark::DoNotOptimize(term.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_ChemotaxisTerm)->Arg(64)->Arg(100);

void BM_Rk4Step(benchmark::State& state) {
  const auto g = square(state);
  auto [u, v] = ks::initial_condition(g, 42);
  ks::sim_state s{0.0, std::move(u), std::move(v)};
  ks::rk4_integrator step(g, ks::model_params::with_gamma(0.25), 1e-3, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step.step(s));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_Rk4Step)->Arg(64)->Arg(100);

}  // namespace
