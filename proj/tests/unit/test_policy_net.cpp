#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "semdrive/checkpoint.hpp"
#include "semdrive/policy_net.hpp"
#include "semdrive/render.hpp"
#include "test_util.hpp"

using namespace semdrive;

TEST_CASE("softmax normalization, shift invariance and entropy bounds") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> logits(kActionCount);
    for (double& l : logits) l = n(rng);
    const auto p = softmax(logits);
    double sum = 0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    std::vector<double> shifted = logits;
    for (double& l : shifted) l += 1000.0;
    const auto q = softmax(shifted);
    for (int k = 0; k < kActionCount; ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-12);
    const double h = entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(9.0) + 1e-12);
  }
  const auto u = softmax(std::vector<double>(kActionCount, 1.0));
  const auto u2 = softmax(std::vector<double>(kActionCount, 1001.0));
  CHECK(u == u2);
  CHECK(std::abs(entropy(u) - std::log(9.0)) <= 1e-9);
}

TEST_CASE("init is deterministic, biases zero, weights within the He bound") {
  const NetworkParams a = init_params(7);
  CHECK(a == init_params(7));
  CHECK_FALSE(a == init_params(8));
  for (LayerIndex b : {kConv1B, kConv2B, kFcB, kPolicyB, kValueB}) {
    for (float x : a[b].data) CHECK(x == 0.0f);
  }
  // Mean of the fc weights: uniform(-B, B) has sigma B/sqrt(3), so the
  // sample mean has sigma B/sqrt(3N).
  const Layer& fc = a[kFcW];
  const double fan_in = fc.shape[1];
  const double bound = std::sqrt(6.0 / fan_in);
  double mean = 0;
  for (float x : fc.data) {
    CHECK(std::abs(x) <= bound * (1 + 1e-6));
    mean += x;
  }
  const double n = static_cast<double>(fc.data.size());
  REQUIRE(n >= 1e4);
  mean /= n;
  CHECK(std::abs(mean) <= 3.0 * bound / std::sqrt(3.0 * n));
}

TEST_CASE("zero network gives a uniform policy and zero value") {
  const NetworkParams z = zero_params(NetArch::standard());
  const TrackSpec t = make_demo_track();
  const FrameStack s(render(t, reset(t, SimConfig{}), RenderConfig{}));
  const ForwardOutput out = forward(z, s);
  for (double p : out.policy) CHECK(p == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(out.value == 0.0);
}

TEST_CASE("forward agrees with the naive reference and is pure") {
  const TrackSpec t = make_demo_track();
  std::mt19937_64 rng(4);
  const NetworkParams p = init_params(13);
  const oracle::NaiveNet ref = oracle::NaiveNet::from(p);
  for (int i = 0; i < 3; ++i) {
    const FrameStack s(render(t, testutil::random_state(t, rng, 3.0), RenderConfig{}));
    const ForwardOutput a = forward(p, s);
    const ForwardOutput b = forward(p, s);
    CHECK(a.logits == b.logits);
    CHECK(a.value == b.value);
    const std::vector<double> expect = ref.run(stack_to_input(s));
    for (int k = 0; k < kActionCount; ++k) CHECK(a.logits[k] == doctest::Approx(expect[k]).epsilon(1e-10));
    CHECK(a.value == doctest::Approx(expect.back()).epsilon(1e-10));
  }
}

TEST_CASE("forward rejects bad input") {
  const NetworkParams p = init_params(1, NetArch::reduced());
  std::vector<double> in(static_cast<std::size_t>(p.arch.input_size()), 0.5);
  in[3] = std::nan("");
  CHECK_THROWS_AS(forward(p, in), std::invalid_argument);
  in.pop_back();
  CHECK_THROWS_AS(forward(p, in), std::invalid_argument);
}

TEST_CASE("zero advantages and zero value weight leave only the entropy term") {
  const NetworkParams p = zero_params(NetArch::reduced());
  std::mt19937_64 rng(2);
  RolloutBatch b;
  for (int t = 0; t < 3; ++t) {
    b.states.push_back(gradcheck::random_stack(8, rng));
    b.actions.push_back(Action::Left);
    b.advantages.push_back(0.0);
    b.returns.push_back(1.0);
  }
  const LossResult r = loss_and_grad(p, b, LossWeights{0.0, 0.01});
  CHECK(r.policy_loss == 0.0);
  CHECK(r.entropy == doctest::Approx(std::log(9.0)).epsilon(1e-12));
  CHECK(r.loss == doctest::Approx(-0.01 * std::log(9.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences on the reduced network") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    const gradcheck::Result r = gradcheck::run(seed);
    CAPTURE(r.worst_layer);
    CAPTURE(r.worst_excess);
    CHECK(r.failed == 0);
    CHECK(r.at_kink == 0);
    CHECK(r.loss_gap <= 1e-9);
  }
}

TEST_CASE("gradients are congruent with parameters") {
  const NetworkParams p = init_params(3, NetArch::reduced());
  std::mt19937_64 rng(3);
  RolloutBatch b{{gradcheck::random_stack(8, rng)}, {Action::Right}, {0.5}, {0.2}};
  const LossResult r = loss_and_grad(p, b, {});
  CHECK(r.grads.congruent_with(p));
  CHECK(r.grads.all_finite());
}

TEST_CASE("checkpoint round trip and shape validation") {
  const NetworkParams p = init_params(21, NetArch::reduced());
  const std::string text = checkpoint_to_json(p);
  CHECK(checkpoint_from_json(text) == p);
  CHECK(checkpoint_from_json(text, NetArch::reduced()) == p);
  CHECK_THROWS_AS(checkpoint_from_json(text, NetArch::standard()), std::invalid_argument);
  CHECK_THROWS_AS(checkpoint_from_json("{\"version\": 1}"), std::invalid_argument);
  CHECK(NetArch::from_id(NetArch::standard().id()) == NetArch::standard());
}
