#include "semdrive/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace semdrive {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

double normalize_angle(double radians) {
  constexpr double kPi = std::numbers::pi;
  double a = std::remainder(radians, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

void TrackSpec::validate() const {
  if (centerline.size() < 2) {
    throw std::invalid_argument("centerline: at least 2 points required, got " +
                                std::to_string(centerline.size()));
  }
  for (std::size_t i = 0; i < centerline.size(); ++i) {
    if (!std::isfinite(centerline[i].x) || !std::isfinite(centerline[i].y)) {
      throw std::invalid_argument("centerline[" + std::to_string(i) +
                                  "]: coordinates must be finite");
    }
  }
  for (std::size_t i = 0; i + 1 < centerline.size(); ++i) {
    if (centerline[i] == centerline[i + 1]) {
      throw std::invalid_argument("centerline[" + std::to_string(i + 1) +
                                  "]: duplicates the previous point");
    }
  }
  if (closed && centerline.front() == centerline.back()) {
    throw std::invalid_argument(
        "centerline: closed track must not repeat its first point at the end");
  }
  if (!std::isfinite(width) || width <= 0.0) {
    throw std::invalid_argument("width: must be a positive finite number");
  }
}

std::size_t TrackSpec::segment_count() const {
  return closed ? centerline.size() : centerline.size() - 1;
}

Vec2 TrackSpec::segment_end(std::size_t i) const {
  return centerline[(i + 1) % centerline.size()];
}

double TrackSpec::segment_length(std::size_t i) const {
  return norm(segment_end(i) - segment_start(i));
}

double TrackSpec::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < segment_count(); ++i) total += segment_length(i);
  return total;
}

TrackSpec make_oval_track(double straight_length, double radius, double width,
                          int arc_points) {
  if (straight_length <= 0 || radius <= 0 || arc_points < 2) {
    throw std::invalid_argument("make_oval_track: bad dimensions");
  }
  constexpr double kPi = std::numbers::pi;
  TrackSpec track;
  track.width = width;
  track.closed = true;
  const double half = straight_length / 2.0;
  // Bottom straight runs +x at y = -radius, right arc turns left (CCW).
  track.centerline.push_back({-half, -radius});
  for (int k = 0; k < arc_points; ++k) {
    const double a = -kPi / 2.0 + kPi * k / arc_points;
    track.centerline.push_back({half + radius * std::cos(a), radius * std::sin(a)});
  }
  for (int k = 0; k < arc_points; ++k) {
    const double a = kPi / 2.0 + kPi * k / arc_points;
    track.centerline.push_back({-half + radius * std::cos(a), radius * std::sin(a)});
  }
  track.validate();
  return track;
}

TrackSpec make_demo_track() {
  // 2 * 150 m straights + a 200 m circle of polyline arcs ~= 500 m.
  constexpr double kStraight = 150.0;
  const double radius = 200.0 / (2.0 * std::numbers::pi);
  TrackSpec track = make_oval_track(kStraight, radius, 8.0, 48);
  // Polyline arcs are slightly shorter than true arcs; rescale the radius so
  // the realized centerline is 500 m.
  const double arcs = track.length() - 2.0 * kStraight;
  const double scale = 200.0 / arcs;
  return make_oval_track(kStraight, radius * scale, 8.0, 48);
}

TrackProjection project_to_track(const TrackSpec& track, Vec2 p) {
  TrackProjection best;
  best.dist_center = std::numeric_limits<double>::infinity();
  double arc_base = 0.0;
  for (std::size_t i = 0; i < track.segment_count(); ++i) {
    const Vec2 a = track.segment_start(i);
    const Vec2 b = track.segment_end(i);
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    const double len = std::sqrt(len2);
    const Vec2 ap = p - a;
    const double t = dot(ap, d) / len2;
    const double side = cross(d, ap);

    Vec2 nearest;
    double dist;
    double t_clamped;
    if (t <= 0.0) {
      nearest = a;
      dist = norm(ap);
      t_clamped = 0.0;
    } else if (t >= 1.0) {
      nearest = b;
      dist = norm(p - b);
      t_clamped = 1.0;
    } else {
      nearest = a + t * d;
      dist = std::abs(side) / len;
      t_clamped = t;
    }
    if (dist < best.dist_center) {
      best.nearest = nearest;
      best.tangent = (1.0 / len) * d;
      best.dist_center = dist;
      best.signed_offset = side < 0.0 ? -dist : dist;
      best.segment = i;
      best.arc_length = arc_base + t_clamped * len;
    }
    arc_base += len;
  }
  return best;
}

ArcPoint point_at_arc_length(const TrackSpec& track, double s) {
  const double total = track.length();
  if (track.closed) {
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
  } else {
    s = std::clamp(s, 0.0, total);
  }
  const std::size_t n = track.segment_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double len = track.segment_length(i);
    const Vec2 a = track.segment_start(i);
    const Vec2 d = track.segment_end(i) - a;
    if (s <= len || i + 1 == n) {
      const double t = std::clamp(s / len, 0.0, 1.0);
      return {a + t * d, (1.0 / len) * d};
    }
    s -= len;
  }
  return {track.centerline.front(), {1.0, 0.0}};  // unreachable for valid tracks
}

TrackRelative track_relative(const TrackSpec& track, const VehicleState& state) {
  const TrackProjection proj = project_to_track(track, state.position);
  TrackRelative rel;
  rel.dist_center = proj.dist_center;
  rel.alpha = normalize_angle(state.heading - std::atan2(proj.tangent.y, proj.tangent.x));
  rel.off_track = proj.dist_center > track.width / 2.0;
  return rel;
}

void RewardParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("reward.beta: must be > 0");
  }
  if (!(gamma_collision < 0.0) || !std::isfinite(gamma_collision)) {
    throw std::invalid_argument("reward.gamma_collision: must be < 0");
  }
}

Action action_from_index(int index) {
  if (index < 0 || index >= kActionCount) {
    throw std::out_of_range("action index out of range: " + std::to_string(index));
  }
  return static_cast<Action>(index);
}

Throttle throttle_of(Action a) {
  switch (a) {
    case Action::StraightAccel:
    case Action::LeftAccel:
    case Action::RightAccel:
      return Throttle::Accel;
    case Action::StraightBrake:
    case Action::LeftBrake:
    case Action::RightBrake:
      return Throttle::Brake;
    default:
      return Throttle::Neutral;
  }
}

Steer steer_of(Action a) {
  switch (a) {
    case Action::LeftAccel:
    case Action::LeftBrake:
    case Action::Left:
      return Steer::Left;
    case Action::RightAccel:
    case Action::RightBrake:
    case Action::Right:
      return Steer::Right;
    default:
      return Steer::Straight;
  }
}

Action make_action(Throttle throttle, Steer steer) {
  const int row = throttle == Throttle::Accel ? 0 : throttle == Throttle::Brake ? 3 : 6;
  const int col = steer == Steer::Straight ? 0 : steer == Steer::Left ? 1 : 2;
  return static_cast<Action>(row + col);
}

std::string_view action_name(Action a) {
  static constexpr std::array<std::string_view, kActionCount> kNames = {
      "StraightAccel", "LeftAccel", "RightAccel", "StraightBrake", "LeftBrake",
      "RightBrake",    "Straight",  "Left",       "Right"};
  return kNames[static_cast<std::size_t>(a)];
}

void SimConfig::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("sim.") + field + ": must be > 0");
    }
  };
  positive(dt, "dt");
  positive(v_max, "v_max");
  positive(accel, "accel");
  positive(brake_decel, "brake_decel");
  positive(steer_rate, "steer_rate");
  if (max_steps < 1) throw std::invalid_argument("sim.max_steps: must be >= 1");
}

StepResult step(const VehicleState& state, Action action, const TrackSpec& track,
                const SimConfig& cfg) {
  double a = 0.0;
  switch (throttle_of(action)) {
    case Throttle::Accel: a = cfg.accel; break;
    case Throttle::Brake: a = -cfg.brake_decel; break;
    case Throttle::Neutral: break;
  }
  double s = 0.0;
  switch (steer_of(action)) {
    case Steer::Left: s = 1.0; break;
    case Steer::Right: s = -1.0; break;
    case Steer::Straight: break;
  }

  StepResult out;
  VehicleState& next = out.state;
  next.speed = std::clamp(state.speed + a * cfg.dt, 0.0, cfg.v_max);
  next.heading = normalize_angle(state.heading + s * cfg.steer_rate * cfg.dt);
  next.position = state.position + (next.speed * cfg.dt) *
                                       Vec2{std::cos(next.heading), std::sin(next.heading)};
  next.step_index = state.step_index + 1;

  out.relative = track_relative(track, next);
  out.collided = out.relative.off_track;
  out.done = out.collided || state.step_index + 1 >= cfg.max_steps;
  return out;
}

double compute_reward(double speed, double alpha, double dist_center, bool collided,
                      const RewardParams& params) {
  if (collided) return params.gamma_collision;
  return (speed * std::cos(alpha) - dist_center) * params.beta;
}

namespace {

VehicleState state_at(const TrackSpec& track, double arc) {
  const ArcPoint at = point_at_arc_length(track, arc);
  VehicleState st;
  st.position = at.position;
  st.heading = normalize_angle(std::atan2(at.tangent.y, at.tangent.x));
  return st;
}

}  // namespace

VehicleState reset(const TrackSpec& track, const SimConfig& /*cfg*/) {
  return state_at(track, 0.0);
}

VehicleState reset(const TrackSpec& track, const SimConfig& /*cfg*/, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.1 * track.length());
  return state_at(track, jitter(rng));
}

}  // namespace semdrive
