#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "semdrive/sim.hpp"
#include "semdrive/track_io.hpp"
#include "test_util.hpp"

using namespace semdrive;

TEST_CASE("projection onto a straight track") {
  const TrackSpec t = testutil::straight_track(-50, 50);
  const TrackProjection p = project_to_track(t, {3, 2});
  CHECK(p.dist_center == doctest::Approx(2.0));
  CHECK(p.tangent.x == doctest::Approx(1.0));
  CHECK(p.tangent.y == doctest::Approx(0.0));
  CHECK(p.signed_offset > 0);
  CHECK(project_to_track(t, {7.25, 0}).dist_center == 0.0);
}

TEST_CASE("L-shaped track tie goes to the lowest segment index") {
  // Segment 0 runs (0,0)->(10,0), segment 1 runs (10,0)->(10,10).
  const TrackSpec t{{{0, 0}, {10, 0}, {10, 10}}, 8.0, false};
  const Vec2 p{7, 3};  // 3 m from both segments
  const auto dense = oracle::dense_centerline_distance(t, p.x, p.y, 1e-3);
  const TrackProjection proj = project_to_track(t, p);
  CHECK(proj.dist_center == doctest::Approx(3.0));
  CHECK(proj.dist_center <= dense.dist + 1e-6);
  CHECK(proj.segment == 0);
  CHECK(dense.segment == 0);
  CHECK(proj.tangent.x == doctest::Approx(1.0));
}

TEST_CASE("projection distance never exceeds densely sampled distance") {
  const TrackSpec t = make_demo_track();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const VehicleState s = testutil::random_state(t, rng, 12.0);
    const TrackProjection proj = project_to_track(t, s.position);
    const auto dense = oracle::dense_centerline_distance(t, s.position.x, s.position.y, 1e-3);
    CHECK(proj.dist_center <= dense.dist + 1e-6);
    CHECK(proj.dist_center == doctest::Approx(oracle::centerline_distance(t, s.position.x, s.position.y)).epsilon(1e-12));
  }
}

TEST_CASE("step kinematics") {
  const TrackSpec t = testutil::straight_track(-50, 50);
  const SimConfig cfg;
  VehicleState s;
  s.speed = 10;
  StepResult r = step(s, Action::Straight, t, cfg);
  CHECK(r.state.position.x == doctest::Approx(1.0));
  CHECK(r.state.position.y == doctest::Approx(0.0));
  CHECK(r.state.speed == 10.0);
  CHECK(r.state.step_index == 1);

  s.speed = 0;
  CHECK(step(s, Action::StraightBrake, t, cfg).state.speed == 0.0);

  s.speed = 5;
  CHECK(step(s, Action::Left, t, cfg).state.heading == doctest::Approx(0.05));
  CHECK(step(s, Action::Right, t, cfg).state.heading == doctest::Approx(-0.05));
  CHECK(step(s, Action::StraightAccel, t, cfg).state.speed == doctest::Approx(5.2));

  s.speed = cfg.v_max;
  CHECK(step(s, Action::LeftAccel, t, cfg).state.speed == cfg.v_max);
}

TEST_CASE("step is deterministic and collision matches the half-width rule") {
  const TrackSpec t = make_demo_track();
  const SimConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, kActionCount - 1);
  for (int i = 0; i < 500; ++i) {
    const VehicleState s = testutil::random_state(t, rng, 5.0);
    const Action a = action_from_index(pick(rng));
    const StepResult r1 = step(s, a, t, cfg);
    const StepResult r2 = step(s, a, t, cfg);
    CHECK(r1.state == r2.state);
    const double d = oracle::centerline_distance(t, r1.state.position.x, r1.state.position.y);
    CHECK(r1.collided == (d > t.width / 2.0));
    CHECK(r1.done == (r1.collided || s.step_index + 1 >= cfg.max_steps));
  }
}

TEST_CASE("episode ends at max_steps") {
  const TrackSpec t = testutil::straight_track(-1000, 1000);
  SimConfig cfg;
  cfg.max_steps = 3;
  VehicleState s;
  StepResult r = step(s, Action::Straight, t, cfg);
  CHECK_FALSE(r.done);
  r = step(r.state, Action::Straight, t, cfg);
  CHECK_FALSE(r.done);
  r = step(r.state, Action::Straight, t, cfg);
  CHECK(r.done);
  CHECK_FALSE(r.collided);
}

TEST_CASE("reward examples") {
  const RewardParams p;
  CHECK(compute_reward(10, 0, 0, false, p) == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(compute_reward(5, std::numbers::pi / 3, 1.0, false, p) == doctest::Approx(0.009).epsilon(1e-12));
  CHECK(compute_reward(17, 0.3, 2.0, true, p) == -0.025);
}

TEST_CASE("reward matches the formula oracle") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> v(0, 30), a(-std::numbers::pi, std::numbers::pi), d(0, 6);
  const RewardParams p;
  for (int i = 0; i < 1000; ++i) {
    const double vi = v(rng), ai = a(rng), di = d(rng);
    const bool hit = i % 7 == 0;
    CHECK(std::abs(compute_reward(vi, ai, di, hit, p) - oracle::reward(vi, ai, di, hit)) <= 1e-12);
  }
}

TEST_CASE("reward on the centerline heading along the track is v*beta") {
  const RewardParams p;
  for (double v : {0.0, 1.0, 3.5, 12.25, 30.0}) CHECK(compute_reward(v, 0.0, 0.0, false, p) == v * p.beta);
}

TEST_CASE("reset") {
  const TrackSpec t = testutil::straight_track(0, 100);
  const SimConfig cfg;
  const VehicleState s = reset(t, cfg);
  CHECK(s.position == Vec2{0, 0});
  CHECK(s.heading == 0.0);
  CHECK(s.speed == 0.0);
  CHECK(s.step_index == 0);
  CHECK(reset(t, cfg, 42) == reset(t, cfg, 42));

  const TrackSpec demo = make_demo_track();
  std::set<std::pair<double, double>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const VehicleState r = reset(demo, cfg, seed);
    const TrackProjection proj = project_to_track(demo, r.position);
    CHECK(proj.dist_center < 1e-9);
    CHECK(proj.arc_length < 0.1 * demo.length() + 1e-9);
    seen.insert({r.position.x, r.position.y});
  }
  CHECK(seen.size() >= 99);
}

TEST_CASE("action table is a fixed total order") {
  for (int i = 0; i < kActionCount; ++i) {
    const Action a = action_from_index(i);
    CHECK(action_index(a) == i);
    CHECK(make_action(throttle_of(a), steer_of(a)) == a);
  }
  CHECK_THROWS_AS(action_from_index(9), std::out_of_range);
  CHECK_THROWS_AS(action_from_index(-1), std::out_of_range);
}

TEST_CASE("demo track geometry") {
  const TrackSpec t = make_demo_track();
  CHECK(t.closed);
  CHECK(t.width == 8.0);
  CHECK(t.length() == doctest::Approx(500.0).epsilon(1e-9));
}

TEST_CASE("config validation rejects bad values") {
  SimConfig c;
  c.dt = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimConfig{};
  c.max_steps = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  RewardParams r;
  r.gamma_collision = 0.1;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  TrackSpec t{{{0, 0}}, 8, false};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("track JSON round trip and diagnostics") {
  const TrackSpec t = make_demo_track();
  const TrackSpec back = parse_track(track_to_json(t));
  CHECK(back.closed == t.closed);
  CHECK(back.width == t.width);
  REQUIRE(back.centerline.size() == t.centerline.size());
  for (std::size_t i = 0; i < t.centerline.size(); ++i) CHECK(back.centerline[i] == t.centerline[i]);
  CHECK_THROWS_AS(parse_track("{\"width\": 8}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_track("{ not json"), std::invalid_argument);
  CHECK_THROWS(load_track("/nonexistent/track.json"));
}
