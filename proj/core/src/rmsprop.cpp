#include "semdrive/rmsprop.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "semdrive/log.hpp"

namespace semdrive {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("optimizer.learning_rate: must be > 0");
  }
  if (!(decay > 0.0 && decay < 1.0)) {
    throw std::invalid_argument("optimizer.decay: must be in (0, 1)");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("optimizer.epsilon: must be > 0");
  }
}

OptimizerState OptimizerState::zeros_like(const LayeredArrays& params) {
  OptimizerState s;
  for (const Layer& l : params.layers) s.mean_square.emplace_back(l.data.size(), 0.0f);
  return s;
}

void rmsprop_update(std::span<float> mean_square, std::span<float> theta,
                    std::span<const float> grad, const OptimizerConfig& cfg) {
  const double keep = cfg.decay;
  const double blend = 1.0 - cfg.decay;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    const double s = keep * mean_square[i] + blend * g * g;
    mean_square[i] = static_cast<float>(s);
    theta[i] = static_cast<float>(theta[i] - cfg.learning_rate * g / std::sqrt(s + cfg.epsilon));
  }
}

namespace {

void require_congruent(const OptimizerState& state, const NetworkParams& params,
                       const Gradients& grads) {
  if (!params.congruent_with(grads) || state.mean_square.size() != params.layers.size()) {
    throw std::invalid_argument("rmsprop: gradients are not shape-congruent with parameters");
  }
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    if (state.mean_square[i].size() != params.layers[i].data.size()) {
      throw std::invalid_argument("rmsprop: optimizer state does not match layer " +
                                  params.layers[i].name);
    }
  }
}

}  // namespace

bool rmsprop_apply(OptimizerState& state, NetworkParams& params, const Gradients& grads,
                   const OptimizerConfig& cfg) {
  require_congruent(state, params, grads);
  if (!grads.all_finite()) return false;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    rmsprop_update(state.mean_square[i], params.layers[i].data, grads.layers[i].data, cfg);
  }
  return true;
}

double global_norm(const Gradients& grads) {
  double sq = 0.0;
  for (const Layer& l : grads.layers) {
    for (float v : l.data) sq += static_cast<double>(v) * v;
  }
  return std::sqrt(sq);
}

double clip_global_norm(Gradients& grads, double max_norm) {
  const double n = global_norm(grads);
  if (!(n > max_norm) || !std::isfinite(n)) return 1.0;
  const double scale = max_norm / n;
  for (Layer& l : grads.layers) {
    for (float& v : l.data) v = static_cast<float>(v * scale);
  }
  return scale;
}

SharedParameterStore::SharedParameterStore(NetworkParams init, OptimizerConfig cfg)
    : params_(std::move(init)),
      state_(OptimizerState::zeros_like(params_)),
      cfg_(cfg),
      locks_(std::make_unique<std::shared_mutex[]>(params_.layers.size())) {
  cfg_.validate();
}

NetworkParams SharedParameterStore::snapshot() const {
  NetworkParams copy;
  copy.arch = params_.arch;
  copy.layers.reserve(params_.layers.size());
  for (std::size_t i = 0; i < params_.layers.size(); ++i) {
    std::shared_lock lock(locks_[i]);
    copy.layers.push_back(params_.layers[i]);
  }
  return copy;
}

OptimizerState SharedParameterStore::optimizer_state() const {
  OptimizerState copy;
  for (std::size_t i = 0; i < state_.mean_square.size(); ++i) {
    std::shared_lock lock(locks_[i]);
    copy.mean_square.push_back(state_.mean_square[i]);
  }
  return copy;
}

bool SharedParameterStore::apply(const Gradients& grads) {
  require_congruent(state_, params_, grads);
  if (!grads.all_finite()) {
    skipped_.fetch_add(1);
    log::error("skipping parameter update: non-finite gradient");
    return false;
  }
  for (std::size_t i = 0; i < params_.layers.size(); ++i) {
    std::unique_lock lock(locks_[i]);
    rmsprop_update(state_.mean_square[i], params_.layers[i].data, grads.layers[i].data, cfg_);
  }
  applied_.fetch_add(1);
  return true;
}

}  // namespace semdrive
