#pragma once

#include <cstdint>

#include "semdrive/render.hpp"
#include "semdrive/sim.hpp"

namespace semdrive {

struct EnvConfig {
  TrackSpec track;
  SimConfig sim;
  RenderConfig render;
  RewardParams reward;

  void validate() const;
};

struct EnvStep {
  double reward = 0.0;
  bool collided = false;
  bool done = false;
  TrackRelative relative;
};

/// One worker's private environment: the simulator plus its rendered
/// 4-frame observation window.
class DrivingEnv {
 public:
  explicit DrivingEnv(EnvConfig cfg);

  /// Starts an episode at the beginning of the centerline.
  const FrameStack& reset();
  /// Starts an episode at a seeded position within the first 10% of the track.
  const FrameStack& reset(std::uint64_t seed);

  /// Advances one step. Throws std::logic_error after the episode ended.
  EnvStep step(Action action);

  const FrameStack& observation() const { return stack_; }
  const VehicleState& state() const { return state_; }
  bool done() const { return done_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  const FrameStack& start(const VehicleState& initial);

  EnvConfig cfg_;
  VehicleState state_;
  FrameStack stack_;
  bool done_ = true;
};

}  // namespace semdrive
