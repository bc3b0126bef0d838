#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "semdrive/pgm.hpp"
#include "semdrive/render.hpp"
#include "test_util.hpp"

using namespace semdrive;

namespace {

SemanticFrame solid(int n, float level) { return SemanticFrame(n, n, level); }

}  // namespace

TEST_CASE("palette") {
  CHECK(class_to_gray(SemanticClass::Road) == 0.45f);
  CHECK(class_to_gray(SemanticClass::OffRoad) == 0.0f);
  CHECK(class_to_gray(SemanticClass::LaneMarking) == 0.9f);
  CHECK(class_to_gray(SemanticClass::EgoVehicle) == 0.7f);
  std::set<float> levels;
  for (SemanticClass c : kAllClasses) {
    levels.insert(class_to_gray(c));
    CHECK(gray_to_class(class_to_gray(c)) == c);
  }
  CHECK(levels.size() == kAllClasses.size());
}

TEST_CASE("every pixel matches the geometric oracle") {
  const TrackSpec t = make_demo_track();
  const RenderConfig cfg;
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    const VehicleState s = testutil::random_state(t, rng, 6.0);
    const SemanticFrame f = render(t, s, cfg);
    int mismatches = 0;
    for (int r = 0; r < cfg.resolution; ++r) {
      for (int c = 0; c < cfg.resolution; ++c) {
        if (gray_to_class(f.at(r, c)) != oracle::pixel_class(t, s, cfg, r, c)) ++mismatches;
      }
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("centered vehicle on a straight track gives a mirror-symmetric frame") {
  const TrackSpec t = testutil::straight_track(-100, 100);
  const RenderConfig cfg;
  VehicleState s;
  const SemanticFrame f = render(t, s, cfg);
  const int w = f.width;
  for (int r = 0; r < f.height; ++r) {
    for (int c = 0; c < w; ++c) CHECK(f.at(r, c) == f.at(r, w - 1 - c));
  }
  // The road band is visible: marking, road and off-road all appear.
  std::set<float> levels(f.pixels.begin(), f.pixels.end());
  CHECK(levels.size() == 4);
}

TEST_CASE("vehicle far from the track sees only off-road and itself") {
  const TrackSpec t = testutil::straight_track(-100, 100);
  const RenderConfig cfg;
  VehicleState s;
  s.position = {0, cfg.view_ahead + cfg.view_half_width + t.width + 10};
  s.heading = 1.0;
  const SemanticFrame f = render(t, s, cfg);
  for (int r = 0; r < f.height; ++r) {
    for (int c = 0; c < f.width; ++c) {
      const SemanticClass expect = oracle::pixel_class(t, s, cfg, r, c) == SemanticClass::EgoVehicle
                                       ? SemanticClass::EgoVehicle
                                       : SemanticClass::OffRoad;
      CHECK(gray_to_class(f.at(r, c)) == expect);
    }
  }
}

TEST_CASE("translation along a straight track leaves the frame unchanged") {
  const TrackSpec t = testutil::straight_track(-1e5, 1e5);
  const RenderConfig cfg;
  VehicleState a;
  a.position = {0, 1.25};
  VehicleState b = a;
  for (double dx : {1.0, 16.0, 250.0, -1024.0}) {
    b.position.x = dx;
    CHECK(render(t, a, cfg) == render(t, b, cfg));
  }
}

TEST_CASE("render is deterministic and uses only palette levels") {
  const TrackSpec t = make_demo_track();
  const RenderConfig cfg;
  std::mt19937_64 rng(3);
  const std::set<float> palette{0.0f, 0.45f, 0.9f, 0.7f};
  for (int i = 0; i < 50; ++i) {
    const VehicleState s = testutil::random_state(t, rng, 30.0);
    const SemanticFrame f = render(t, s, cfg);
    CHECK(f == render(t, s, cfg));
    for (float p : f.pixels) CHECK(palette.count(p) == 1);
  }
}

TEST_CASE("frame stack is a FIFO window of four") {
  const SemanticFrame A = solid(4, 0.0f), B = solid(4, 0.45f), C = solid(4, 0.7f),
                      D = solid(4, 0.9f), E = solid(4, 0.45f);
  FrameStack s(A);
  for (int i = 0; i < 4; ++i) CHECK(s[i] == A);
  s.push(B);
  s.push(C);
  s.push(D);
  CHECK(s[0] == A);
  CHECK(s[3] == D);
  s.push(E);
  CHECK(s[0] == B);
  CHECK(s[1] == C);
  CHECK(s[2] == D);
  CHECK(s[3] == E);
  CHECK_THROWS_AS(s.push(solid(5, 0.0f)), std::invalid_argument);
}

TEST_CASE("PGM round trip") {
  const TrackSpec t = make_demo_track();
  const RenderConfig cfg;
  const SemanticFrame f = render(t, reset(t, SimConfig{}), cfg);
  const std::string bytes = encode_pgm(f);
  CHECK(bytes.rfind("P5\n64 64\n255\n", 0) == 0);
  CHECK(bytes.size() == 13 + 64 * 64);
  CHECK(decode_pgm(bytes) == f);
  CHECK_THROWS(decode_pgm("P2\n1 1\n255\n0"));
  CHECK_THROWS(decode_pgm("P5\n4 4\n255\nxx"));
}
