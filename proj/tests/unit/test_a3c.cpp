#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semdrive/a3c.hpp"
#include "semdrive/rmsprop.hpp"
#include "test_util.hpp"

using namespace semdrive;

namespace {

EnvConfig small_env(TrackSpec track) {
  EnvConfig e{std::move(track), {}, {}, {}};
  e.render.resolution = 8;
  return e;
}

}  // namespace

TEST_CASE("n-step return examples") {
  const std::vector<double> r{1, 1, 1};
  CHECK(n_step_returns(r, 0.0, 0.5) == std::vector<double>{1.75, 1.5, 1.0});
  const std::vector<double> q{0.3, -2.0, 4.5};
  CHECK(n_step_returns(q, 9.0, 0.0) == q);
}

TEST_CASE("n-step returns match brute-force discounted sums") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(1, 20);
  std::uniform_real_distribution<double> u(-1, 1), d(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> r(static_cast<std::size_t>(len(rng)));
    for (double& x : r) x = u(rng);
    const double boot = 5 * u(rng);
    const double disc = d(rng);
    const auto got = n_step_returns(r, boot, disc);
    const auto want = oracle::brute_returns(r, boot, disc);
    REQUIRE(got.size() == r.size());
    for (std::size_t t = 0; t < r.size(); ++t) {
      CHECK(std::abs(got[t] - want[t]) <= 1e-12);
      const double next = t + 1 < r.size() ? got[t + 1] : boot;
      CHECK(got[t] == r[t] + disc * next);
    }
  }
}

TEST_CASE("long constant-reward buffers stay below r/(1-d)") {
  const std::vector<double> r(5000, 0.06);
  const double d = 0.99;
  const auto ret = n_step_returns(r, 0.0, d);
  CHECK(ret.front() <= 0.06 / (1 - d));
  CHECK(ret.front() == doctest::Approx(0.06 / (1 - d)).epsilon(1e-9));
}

TEST_CASE("advantages") {
  CHECK(compute_advantages(std::vector<double>{2.0, 1.0}, std::vector<double>{0.5, 1.5}) ==
        std::vector<double>{1.5, -0.5});
  const std::vector<double> v{0.1, 0.2};
  CHECK(compute_advantages(v, v) == std::vector<double>{0, 0});
  CHECK(compute_advantages(v, std::vector<double>{0, 0}) == v);
  CHECK_THROWS_AS(compute_advantages(v, std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("rmsprop single step") {
  const OptimizerConfig cfg;
  std::vector<float> s{0.0f}, theta{0.0f};
  const std::vector<float> g{1.0f};
  rmsprop_update(s, theta, g, cfg);
  const auto want = oracle::rmsprop(0, 0, 1, 0.01, 0.9, 0.1);
  CHECK(want.theta == doctest::Approx(-0.022360).epsilon(1e-5));
  CHECK(std::abs(theta[0] - want.theta) <= 1e-9);
  CHECK(s[0] == doctest::Approx(0.1).epsilon(1e-7));

  std::vector<float> s2{0.5f}, t2{1.25f};
  rmsprop_update(s2, t2, std::vector<float>{0.0f}, cfg);
  CHECK(t2[0] == 1.25f);
  CHECK(s2[0] == doctest::Approx(0.45).epsilon(1e-7));
}

TEST_CASE("repeated identical gradients give non-increasing step sizes") {
  const OptimizerConfig cfg;
  for (float g : {0.01f, 0.3f, 1.0f, 7.0f, -2.0f}) {
    std::vector<float> s{0.0f}, theta{0.0f};
    double prev = std::numeric_limits<double>::infinity();
    oracle::RmsStep ref{0, 0};
    for (int k = 0; k < 50; ++k) {
      const float before = theta[0];
      rmsprop_update(s, theta, std::vector<float>{g}, cfg);
      const double prev_ref = ref.theta;
      ref = oracle::rmsprop(ref.s, ref.theta, g, cfg.learning_rate, cfg.decay, cfg.epsilon);
      const double step = std::abs(ref.theta - prev_ref);
      CHECK(step <= prev);
      prev = step;
      CHECK(std::abs((theta[0] - before) - (ref.theta - prev_ref)) <= 1e-6);
    }
  }
}

TEST_CASE("non-finite gradients skip the whole update") {
  const NetworkParams p = init_params(5, NetArch::reduced());
  SharedParameterStore store(p, {});
  Gradients g = zero_gradients(p.arch);
  for (auto& layer : g.layers) std::fill(layer.data.begin(), layer.data.end(), 0.5f);
  g.layers.back().data[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_FALSE(store.apply(g));
  CHECK(store.snapshot() == p);
  CHECK(store.skipped() == 1);
  g.layers.back().data[0] = 0.5f;
  CHECK(store.apply(g));
  CHECK(store.applied() == 1);
  CHECK(store.snapshot().all_finite());
  CHECK_FALSE(store.snapshot() == p);
}

TEST_CASE("global norm clipping") {
  Gradients g = zero_gradients(NetArch::reduced());
  g.layers[0].data[0] = 30.0f;
  g.layers[4].data[1] = 40.0f;
  CHECK(global_norm(g) == doctest::Approx(50.0));
  clip_global_norm(g, 40.0);
  CHECK(global_norm(g) == doctest::Approx(40.0).epsilon(1e-6));
  clip_global_norm(g, 100.0);
  CHECK(global_norm(g) == doctest::Approx(40.0).epsilon(1e-6));
}

TEST_CASE("sampling stays in the policy support") {
  std::mt19937_64 rng(1);
  const std::vector<double> pol{0, 0.2, 0, 0, 0.5, 0, 0.3, 0, 0};
  for (int i = 0; i < 2000; ++i) {
    const Action a = sample_action(pol, rng);
    CHECK(pol[static_cast<std::size_t>(action_index(a))] >= 0.2);
  }
  CHECK(greedy_action(pol) == Action::LeftBrake);
  CHECK(greedy_action(std::vector<double>(9, 1.0 / 9)) == Action::StraightAccel);
}

TEST_CASE("greedy rollouts on a straight track are reproducible") {
  const EnvConfig ec = small_env(testutil::straight_track(-10, 500));
  const NetworkParams p = init_params(9, NetArch::reduced());
  auto run = [&] {
    DrivingEnv env(ec);
    env.reset(3);
    std::mt19937_64 rng(4);
    std::vector<RolloutBuffer> out;
    for (int k = 0; k < 4 && !env.done(); ++k) out.push_back(collect_rollout(env, p, 5, rng, SamplingMode::Greedy));
    return out;
  };
  const auto a = run(), b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].steps.size() == b[i].steps.size());
    CHECK(a[i].bootstrap_value == b[i].bootstrap_value);
    for (std::size_t t = 0; t < a[i].steps.size(); ++t) {
      CHECK(a[i].steps[t].action == b[i].steps[t].action);
      CHECK(a[i].steps[t].reward == b[i].steps[t].reward);
      CHECK(a[i].steps[t].state == b[i].steps[t].state);
    }
  }
}

TEST_CASE("a terminal step ends the rollout early with zero bootstrap") {
  EnvConfig ec = small_env(testutil::straight_track(-10, 500));
  ec.sim.max_steps = 3;
  const NetworkParams p = init_params(2, NetArch::reduced());
  DrivingEnv env(ec);
  env.reset();
  std::mt19937_64 rng(0);
  const RolloutBuffer r = collect_rollout(env, p, 5, rng);
  CHECK(r.steps.size() == 3);
  CHECK(r.terminal);
  CHECK(r.bootstrap_value == 0.0);
  CHECK(env.done());
}

TEST_CASE("single-worker training is reproducible") {
  const EnvConfig ec = small_env(make_demo_track());
  TrainerConfig cfg;
  cfg.n_workers = 1;
  cfg.total_steps = 3000;
  cfg.seed = 77;
  const TrainResult a = train(cfg, ec, {}, {}, NetArch::reduced());
  const TrainResult b = train(cfg, ec, {}, {}, NetArch::reduced());
  CHECK(a.report.steps == 3000);
  REQUIRE(a.report.episodes.size() == b.report.episodes.size());
  REQUIRE_FALSE(a.report.episodes.empty());
  for (std::size_t i = 0; i < a.report.episodes.size(); ++i) {
    CHECK(a.report.episodes[i].total_reward == b.report.episodes[i].total_reward);
    CHECK(a.report.episodes[i].steps == b.report.episodes[i].steps);
    CHECK(a.report.episodes[i].entropy == b.report.episodes[i].entropy);
  }
  CHECK(a.final_params == b.final_params);
  CHECK(a.final_params.all_finite());
}

TEST_CASE("zero budget returns the initialization") {
  const EnvConfig ec = small_env(make_demo_track());
  TrainerConfig cfg;
  cfg.n_workers = 3;
  cfg.total_steps = 0;
  cfg.seed = 12;
  const TrainResult r = train(cfg, ec, {}, {}, NetArch::reduced());
  CHECK(r.report.episodes.empty());
  CHECK(r.report.steps == 0);
  CHECK(r.final_params == init_params(12, NetArch::reduced()));
}

TEST_CASE("multi-worker training consumes the budget exactly and stays finite") {
  const EnvConfig ec = small_env(make_demo_track());
  TrainerConfig cfg;
  cfg.n_workers = 4;
  cfg.total_steps = 2003;
  cfg.seed = 5;
  std::map<int, std::uint64_t> last;
  bool ordered = true;
  TrainHooks hooks;
  hooks.on_episode = [&](const EpisodeRecord& e) {
    if (last.count(e.worker) && e.episode <= last[e.worker]) ordered = false;
    last[e.worker] = e.episode;
  };
  const TrainResult r = train(cfg, ec, {}, hooks, NetArch::reduced());
  CHECK(r.report.steps == 2003);
  CHECK(ordered);
  CHECK(r.final_params.all_finite());
}

TEST_CASE("uniform-policy baseline is reproducible") {
  const EnvConfig ec{make_demo_track(), {}, {}, {}};
  const auto a = uniform_policy_episode_rewards(ec, 5, 1);
  CHECK(a == uniform_policy_episode_rewards(ec, 5, 1));
  CHECK(a.size() == 5);
}
