#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace semdrive {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 v);

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

/// Piecewise-linear centerline with a constant drivable width. A closed
/// track has an implicit segment from the last point back to the first.
struct TrackSpec {
  std::vector<Vec2> centerline;
  double width = 8.0;
  bool closed = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  std::size_t segment_count() const;
  Vec2 segment_start(std::size_t i) const { return centerline[i]; }
  Vec2 segment_end(std::size_t i) const;
  double segment_length(std::size_t i) const;
  double length() const;
};

/// Oval made of two straights joined by two semicircles, driven
/// counter-clockwise. `arc_points` is the number of segments per semicircle.
TrackSpec make_oval_track(double straight_length, double radius, double width,
                          int arc_points = 48);

/// The 500 m / 8 m-wide oval used by the demo config and acceptance runs.
TrackSpec make_demo_track();

struct TrackProjection {
  Vec2 nearest;
  Vec2 tangent;            // unit direction of the minimizing segment
  double dist_center = 0;  // unsigned
  double signed_offset = 0;  // positive when the point lies left of the tangent
  std::size_t segment = 0;
  double arc_length = 0;   // centerline arc length at `nearest`
};

/// Minimum distance over all segments; ties go to the lowest segment index.
TrackProjection project_to_track(const TrackSpec& track, Vec2 position);

/// Point and unit tangent at arc length `s`. Closed tracks wrap, open tracks
/// clamp to their ends.
struct ArcPoint {
  Vec2 position;
  Vec2 tangent;
};
ArcPoint point_at_arc_length(const TrackSpec& track, double s);

struct VehicleState {
  Vec2 position;
  double heading = 0.0;  // radians, (-pi, pi]
  double speed = 0.0;    // m/s, [0, v_max]
  std::int64_t step_index = 0;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct TrackRelative {
  double dist_center = 0.0;
  double alpha = 0.0;  // velocity direction minus track tangent, (-pi, pi]
  bool off_track = false;
};

TrackRelative track_relative(const TrackSpec& track, const VehicleState& state);

struct RewardParams {
  double beta = 0.006;
  double gamma_collision = -0.025;

  void validate() const;
};

/// Fixed action order; the index of each enumerator is its network output slot.
enum class Action : std::uint8_t {
  StraightAccel = 0,
  LeftAccel = 1,
  RightAccel = 2,
  StraightBrake = 3,
  LeftBrake = 4,
  RightBrake = 5,
  Straight = 6,
  Left = 7,
  Right = 8,
};

inline constexpr int kActionCount = 9;

enum class Throttle : std::uint8_t { Accel, Brake, Neutral };
enum class Steer : std::uint8_t { Left, Straight, Right };

constexpr int action_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int index);
Throttle throttle_of(Action a);
Steer steer_of(Action a);
Action make_action(Throttle throttle, Steer steer);
std::string_view action_name(Action a);

inline constexpr std::array<Action, kActionCount> kAllActions = {
    Action::StraightAccel, Action::LeftAccel,  Action::RightAccel,
    Action::StraightBrake, Action::LeftBrake,  Action::RightBrake,
    Action::Straight,      Action::Left,       Action::Right,
};

struct SimConfig {
  double dt = 0.1;
  double v_max = 30.0;
  double accel = 2.0;
  double brake_decel = 4.0;
  double steer_rate = 0.5;
  std::int64_t max_steps = 1000;

  void validate() const;
};

struct StepResult {
  VehicleState state;
  TrackRelative relative;
  bool collided = false;
  bool done = false;
};

/// Semi-implicit kinematic update: speed first, then heading, then position
/// using the updated speed and heading. Left steering increases the heading.
StepResult step(const VehicleState& state, Action action,
                const TrackSpec& track, const SimConfig& cfg);

double compute_reward(double speed, double alpha, double dist_center,
                      bool collided, const RewardParams& params);

/// Start of the centerline, heading along the first tangent, at rest.
VehicleState reset(const TrackSpec& track, const SimConfig& cfg);

/// As above, but the start is drawn uniformly from the first 10% of the
/// track's arc length using a generator seeded with `seed`.
VehicleState reset(const TrackSpec& track, const SimConfig& cfg,
                   std::uint64_t seed);

}  // namespace semdrive
