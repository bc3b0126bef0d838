#include "semdrive/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace semdrive {

namespace {

constexpr float kOffRoadLevel = 0.0f;
constexpr float kRoadLevel = 0.45f;
constexpr float kMarkingLevel = 0.9f;
constexpr float kEgoLevel = 0.7f;

constexpr int kTile = 8;

struct Segment {
  Vec2 a;
  Vec2 d;
  double len2;
  double len;
};

double segment_distance(const Segment& s, Vec2 p) {
  const Vec2 ap = p - s.a;
  const double t = dot(ap, s.d) / s.len2;
  if (t <= 0.0) return norm(ap);
  if (t >= 1.0) return norm(ap - s.d);
  return std::abs(cross(s.d, ap)) / s.len;
}

}  // namespace

float class_to_gray(SemanticClass c) {
  switch (c) {
    case SemanticClass::Road: return kRoadLevel;
    case SemanticClass::LaneMarking: return kMarkingLevel;
    case SemanticClass::OffRoad: return kOffRoadLevel;
    case SemanticClass::EgoVehicle: return kEgoLevel;
  }
  return kOffRoadLevel;
}

SemanticClass gray_to_class(double level) {
  SemanticClass best = SemanticClass::OffRoad;
  double best_gap = std::numeric_limits<double>::infinity();
  for (SemanticClass c : kAllClasses) {
    const double gap = std::abs(level - static_cast<double>(class_to_gray(c)));
    if (gap < best_gap) {
      best_gap = gap;
      best = c;
    }
  }
  return best;
}

void RenderConfig::validate() const {
  if (resolution < 1) throw std::invalid_argument("render.resolution: must be >= 1");
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("render.") + field + ": must be > 0");
    }
  };
  positive(view_ahead, "view_ahead");
  positive(view_half_width, "view_half_width");
  positive(marking_width, "marking_width");
  positive(ego_length, "ego_length");
  positive(ego_width, "ego_width");
}

EgoOffset pixel_ego_offset(const RenderConfig& cfg, int row, int col) {
  const int n = cfg.resolution;
  return {(n - row - 0.5) * cfg.pixel_height(),
          (col + 0.5 - n / 2.0) * cfg.pixel_width()};
}

Vec2 pixel_world_point(const RenderConfig& cfg, const VehicleState& state, int row, int col) {
  const EgoOffset off = pixel_ego_offset(cfg, row, col);
  const Vec2 forward{std::cos(state.heading), std::sin(state.heading)};
  const Vec2 right{forward.y, -forward.x};
  return state.position + off.ahead * forward + off.right * right;
}

SemanticFrame render(const TrackSpec& track, const VehicleState& state, const RenderConfig& cfg) {
  const int n = cfg.resolution;
  SemanticFrame frame(n, n, kOffRoadLevel);

  std::vector<Segment> segments;
  segments.reserve(track.segment_count());
  for (std::size_t i = 0; i < track.segment_count(); ++i) {
    const Vec2 a = track.segment_start(i);
    const Vec2 d = track.segment_end(i) - a;
    const double len2 = dot(d, d);
    segments.push_back({a, d, len2, std::sqrt(len2)});
  }

  const double road_half = track.width / 2.0;
  const double reach = std::max(road_half, cfg.marking_width);
  const double half_ego_width = cfg.ego_width / 2.0;

  // Segments farther than `reach` from every pixel of a tile cannot change
  // any pixel's class, so each tile only tests the segments near it.
  std::vector<const Segment*> near;
  for (int r0 = 0; r0 < n; r0 += kTile) {
    for (int c0 = 0; c0 < n; c0 += kTile) {
      const int r1 = std::min(r0 + kTile, n) - 1;
      const int c1 = std::min(c0 + kTile, n) - 1;
      const Vec2 p00 = pixel_world_point(cfg, state, r0, c0);
      const Vec2 p11 = pixel_world_point(cfg, state, r1, c1);
      const Vec2 center = 0.5 * (p00 + p11);
      const double radius = 0.5 * norm(p11 - p00);

      near.clear();
      for (const Segment& s : segments) {
        if (segment_distance(s, center) <= radius + reach) near.push_back(&s);
      }

      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          const EgoOffset off = pixel_ego_offset(cfg, r, c);
          if (off.ahead <= cfg.ego_length && std::abs(off.right) <= half_ego_width) {
            frame.at(r, c) = kEgoLevel;
            continue;
          }
          if (near.empty()) continue;
          const Vec2 p = pixel_world_point(cfg, state, r, c);
          double dist = std::numeric_limits<double>::infinity();
          for (const Segment* s : near) dist = std::min(dist, segment_distance(*s, p));
          if (dist <= cfg.marking_width) {
            frame.at(r, c) = kMarkingLevel;
          } else if (dist <= road_half) {
            frame.at(r, c) = kRoadLevel;
          }
        }
      }
    }
  }
  return frame;
}

FrameStack::FrameStack(const SemanticFrame& first) { frames_.fill(first); }

void FrameStack::push(const SemanticFrame& frame) {
  if (frame.width != width() || frame.height != height()) {
    throw std::invalid_argument("frame stack: frame is " + std::to_string(frame.width) + "x" +
                                std::to_string(frame.height) + ", stack holds " +
                                std::to_string(width()) + "x" + std::to_string(height()));
  }
  std::rotate(frames_.begin(), frames_.begin() + 1, frames_.end());
  frames_.back() = frame;
}

}  // namespace semdrive
