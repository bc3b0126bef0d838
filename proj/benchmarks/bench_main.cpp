#include <benchmark/benchmark.h>

#include <random>

#include "semdrive/a3c.hpp"
#include "semdrive/env.hpp"
#include "semdrive/policy_net.hpp"
#include "semdrive/render.hpp"

using namespace semdrive;

namespace {

FrameStack demo_stack() {
  const TrackSpec t = make_demo_track();
  return FrameStack(render(t, reset(t, SimConfig{}, 1), RenderConfig{}));
}

void BM_Render(benchmark::State& state) {
  const TrackSpec t = make_demo_track();
  const RenderConfig cfg;
  VehicleState s = reset(t, SimConfig{}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(render(t, s, cfg));
}
BENCHMARK(BM_Render);

void BM_EnvStep(benchmark::State& state) {
  DrivingEnv env(EnvConfig{make_demo_track(), {}, {}, {}});
  env.reset(1);
  std::uint64_t episode = 1;
  for (auto _ : state) {
    if (env.done()) env.reset(++episode);
    benchmark::DoNotOptimize(env.step(Action::StraightAccel));
  }
}
BENCHMARK(BM_EnvStep);

void BM_Forward(benchmark::State& state) {
  const NetworkParams p = init_params(1);
  const FrameStack s = demo_stack();
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, s));
}
BENCHMARK(BM_Forward);

void BM_LossAndGrad(benchmark::State& state) {
  const NetworkParams p = init_params(1);
  const FrameStack s = demo_stack();
  RolloutBatch b;
  for (int t = 0; t < state.range(0); ++t) {
    b.states.push_back(s);
    b.actions.push_back(action_from_index(t % kActionCount));
    b.advantages.push_back(0.1 * t);
    b.returns.push_back(0.5);
  }
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(p, b, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrad)->Arg(1)->Arg(5);

void BM_RmsPropApply(benchmark::State& state) {
  NetworkParams p = init_params(1);
  OptimizerState opt = OptimizerState::zeros_like(p);
  Gradients g = zero_gradients(p.arch);
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n(0.0f, 1e-3f);
  for (auto& layer : g.layers) for (float& x : layer.data) x = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(rmsprop_apply(opt, p, g, {}));
}
BENCHMARK(BM_RmsPropApply);

}  // namespace
BENCHMARK_MAIN();
