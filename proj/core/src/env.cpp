#include "semdrive/env.hpp"

#include <stdexcept>

namespace semdrive {

void EnvConfig::validate() const {
  track.validate();
  sim.validate();
  render.validate();
  reward.validate();
}

DrivingEnv::DrivingEnv(EnvConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

const FrameStack& DrivingEnv::reset() { return start(semdrive::reset(cfg_.track, cfg_.sim)); }

const FrameStack& DrivingEnv::reset(std::uint64_t seed) {
  return start(semdrive::reset(cfg_.track, cfg_.sim, seed));
}

const FrameStack& DrivingEnv::start(const VehicleState& initial) {
  state_ = initial;
  stack_ = FrameStack(render(cfg_.track, state_, cfg_.render));
  done_ = false;
  return stack_;
}

EnvStep DrivingEnv::step(Action action) {
  if (done_) throw std::logic_error("DrivingEnv::step called on a finished episode");
  const StepResult r = semdrive::step(state_, action, cfg_.track, cfg_.sim);
  state_ = r.state;
  done_ = r.done;

  EnvStep out;
  out.relative = r.relative;
  out.collided = r.collided;
  out.done = r.done;
  out.reward = compute_reward(state_.speed, r.relative.alpha, r.relative.dist_center, r.collided,
                              cfg_.reward);
  stack_.push(render(cfg_.track, state_, cfg_.render));
  return out;
}

}  // namespace semdrive
