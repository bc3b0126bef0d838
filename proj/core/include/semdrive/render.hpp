#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "semdrive/sim.hpp"

namespace semdrive {

enum class SemanticClass : std::uint8_t { Road, LaneMarking, OffRoad, EgoVehicle };

inline constexpr std::array<SemanticClass, 4> kAllClasses = {
    SemanticClass::Road, SemanticClass::LaneMarking, SemanticClass::OffRoad,
    SemanticClass::EgoVehicle};

/// Palette: OffRoad 0.0, Road 0.45, LaneMarking 0.9, EgoVehicle 0.7.
float class_to_gray(SemanticClass c);

/// Nearest palette entry; inverse of class_to_gray on the palette.
SemanticClass gray_to_class(double level);

struct RenderConfig {
  int resolution = 64;            // square frames
  double view_ahead = 40.0;       // meters from the bottom edge to the top edge
  double view_half_width = 20.0;  // meters from the center column to either side
  double marking_width = 0.5;     // lane marking: within this distance of the centerline
  double ego_length = 4.0;
  double ego_width = 2.0;

  void validate() const;

  double pixel_height() const { return view_ahead / resolution; }
  double pixel_width() const { return 2.0 * view_half_width / resolution; }
};

struct SemanticFrame {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // row-major, row 0 is the far edge

  SemanticFrame() = default;
  SemanticFrame(int w, int h, float fill = 0.0f)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  float at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  float& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }

  friend bool operator==(const SemanticFrame&, const SemanticFrame&) = default;
};

/// Ego-frame coordinates of a pixel center: meters ahead of the vehicle and
/// meters to its right.
struct EgoOffset {
  double ahead;
  double right;
};
EgoOffset pixel_ego_offset(const RenderConfig& cfg, int row, int col);

/// World position of a pixel center for a vehicle pose.
Vec2 pixel_world_point(const RenderConfig& cfg, const VehicleState& state, int row, int col);

/// Top-down ego-centric rasterization: vehicle at the bottom center facing up.
SemanticFrame render(const TrackSpec& track, const VehicleState& state, const RenderConfig& cfg);

/// The 4 most recent frames, oldest first.
class FrameStack {
 public:
  static constexpr int kDepth = 4;

  FrameStack() = default;
  /// Fresh stack: `first` replicated kDepth times.
  explicit FrameStack(const SemanticFrame& first);

  /// Drops the oldest frame and appends `frame`. Throws std::invalid_argument
  /// when the dimensions differ from the frames already held.
  void push(const SemanticFrame& frame);

  const std::array<SemanticFrame, kDepth>& frames() const { return frames_; }
  const SemanticFrame& operator[](int i) const { return frames_[static_cast<std::size_t>(i)]; }
  int width() const { return frames_[0].width; }
  int height() const { return frames_[0].height; }

  friend bool operator==(const FrameStack&, const FrameStack&) = default;

 private:
  std::array<SemanticFrame, kDepth> frames_;
};

}  // namespace semdrive
