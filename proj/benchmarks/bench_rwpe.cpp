#include <benchmark/benchmark.h>

#include "rwpe/asymptotics.hpp"
#include "rwpe/simulator.hpp"

using namespace rwpe;

namespace {

// Nearest-neighbour walk on an m x m torus with tilted conductances.
Environment tilted(std::int64_t m) {
  const TorusDims dims({m, m});
  EdgeWeights s(dims.size() * 2);
  for (std::size_t e = 0; e < s.size(); ++e) s[e] = 1.0 + 0.1 * static_cast<double>(e % 7);
  const std::vector<double> h{0.2, -0.1};
  return make_tilted_conductance(dims, s, h);
}

void BM_DiffusionMatrix(benchmark::State& state) {
  const auto env = tilted(state.range(0));
  for (auto _ : state) {
    const auto chain = InducedChain::build(env);
    benchmark::DoNotOptimize(analyze(env, chain).sigma);
  }
  state.SetLabel(std::to_string(env.num_sites()) + " sites");
}
BENCHMARK(BM_DiffusionMatrix)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_SampleTrajectory(benchmark::State& state) {
  const auto env = tilted(4);
  const Sampler sampler(env);
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample_trajectory(state.range(0), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleTrajectory)->Arg(1000)->Arg(100000);

void BM_SampleTwoStage(benchmark::State& state) {
  const auto env = tilted(4);
  const Sampler sampler(env);
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample_two_stage(state.range(0), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleTwoStage)->Arg(1000)->Arg(100000);

void BM_Hitting(benchmark::State& state) {
  const auto env = tilted(4);
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(hitting_probability(env, IntVec{2, -1}, state.range(0), 1000, seed++, kDefaultMaxSteps, {1}));
}
BENCHMARK(BM_Hitting)->Arg(2)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
