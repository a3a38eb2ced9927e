#include "batchlab/env/registry.hpp"
#include "batchlab/extraction/extraction.hpp"
#include "batchlab/nn/mlp.hpp"
#include "batchlab/policy/config.hpp"
#include "batchlab/policy/diffusion.hpp"
#include "batchlab/rollout/collect.hpp"
#include "batchlab/rollout/transition_table.hpp"
#include "batchlab/value/iql.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace batchlab;

void BM_MlpForward(benchmark::State& state) {
  Rng rng(1);
  const auto rows = static_cast<std::size_t>(state.range(0));
  auto net = nn::MlpParams::init({20, 64, 64, 2}, nn::Activation::relu, rng);
  nn::Tensor x = nn::Tensor::matrix(rows, 20, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(64)->Arg(256);

std::unique_ptr<policy::Policy> diffusion_policy(int steps) {
  policy::PolicyConfig c;
  c.diffusion_steps = steps;
  Rng rng(2);
  return policy::init_policy(c, 2, {{-1.0, -1.0}, {1.0, 1.0}}, rng);
}

void BM_DiffusionSample(benchmark::State& state) {
  const auto pol = diffusion_policy(static_cast<int>(state.range(1)));
  const std::vector<double> s{0.1, -0.3};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pol->sample(s, static_cast<std::size_t>(state.range(0)), ++seed));
}
BENCHMARK(BM_DiffusionSample)->Args({1, 25})->Args({64, 25})->Args({64, 100});

std::vector<rollout::Trajectory> demos(std::size_t n) {
  const auto env = env::make_environment("TwoCorridors", {}, 0.99);
  return env::scripted_demos(*env, static_cast<int>(n), 0.1, 3);
}

void BM_IqlUpdateStep(benchmark::State& state) {
  const auto data = demos(4);
  const rollout::TransitionTable table(data);
  value::IqlConfig c;
  c.steps_per_trajectory = 25;  // 100 steps per call
  for (auto _ : state) benchmark::DoNotOptimize(value::update_value(table, c, 1));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_IqlUpdateStep)->Unit(benchmark::kMillisecond);

void BM_PolicyTrainStep(benchmark::State& state) {
  const auto data = demos(4);
  const rollout::TransitionTable table(data);
  policy::PolicyConfig c;
  c.policy_class = state.range(0) == 0 ? policy::PolicyClass::gaussian : policy::PolicyClass::diffusion;
  c.steps_per_trajectory = 25;
  const policy::ActionBounds bounds{{-1.0, -1.0}, {1.0, 1.0}};
  for (auto _ : state)
    benchmark::DoNotOptimize(extraction::train_policy(table, nullptr, {.kind = extraction::ExtractionKind::none_il}, c, bounds, 1));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_PolicyTrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BestOfNEpisode(benchmark::State& state) {
  const auto env = env::make_environment("TwoCorridors", {}, 0.99);
  const auto pol = diffusion_policy(25);
  Rng rng(3);
  value::IqlConfig vc;
  const auto heads = value::ValueHeads::init(2, 2, vc, rng);
  const rollout::Actor actor{pol.get(), &heads, static_cast<std::size_t>(state.range(0))};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rollout::run_episode(*env, actor, std::nullopt, ++seed));
}
BENCHMARK(BM_BestOfNEpisode)->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
