#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <vector>

#include "semdrive/policy_net.hpp"

namespace semdrive {

struct OptimizerConfig {
  double learning_rate = 0.01;
  double decay = 0.9;
  double epsilon = 0.1;

  void validate() const;
};

/// Running average of squared gradients, one array per parameter layer.
struct OptimizerState {
  std::vector<std::vector<float>> mean_square;

  static OptimizerState zeros_like(const LayeredArrays& params);
};

/// s <- decay s + (1 - decay) g^2;  theta <- theta - lr g / sqrt(s + eps).
void rmsprop_update(std::span<float> mean_square, std::span<float> theta,
                    std::span<const float> grad, const OptimizerConfig& cfg);

/// Applies one step to every layer. Returns false, leaving both `state` and
/// `params` untouched, when any gradient value is non-finite. Throws
/// std::invalid_argument when shapes are not congruent.
bool rmsprop_apply(OptimizerState& state, NetworkParams& params, const Gradients& grads,
                   const OptimizerConfig& cfg);

double global_norm(const Gradients& grads);

/// Rescales so the global L2 norm is at most `max_norm`; returns the factor.
double clip_global_norm(Gradients& grads, double max_norm);

/// Global parameters and optimizer statistics shared by all workers.
/// Reads and writes lock one layer at a time, so a snapshot is consistent
/// within each layer and an update is never partially visible in a layer.
/// Different layers may reflect different updates (Hogwild-style staleness).
class SharedParameterStore {
 public:
  SharedParameterStore(NetworkParams init, OptimizerConfig cfg);

  NetworkParams snapshot() const;
  OptimizerState optimizer_state() const;

  /// Returns false (and logs) when the update was skipped for non-finite
  /// gradients. Throws std::invalid_argument on shape mismatch.
  bool apply(const Gradients& grads);

  std::uint64_t applied() const { return applied_.load(); }
  std::uint64_t skipped() const { return skipped_.load(); }

 private:
  NetworkParams params_;
  OptimizerState state_;
  OptimizerConfig cfg_;
  std::unique_ptr<std::shared_mutex[]> locks_;
  std::atomic<std::uint64_t> applied_{0};
  std::atomic<std::uint64_t> skipped_{0};
};

}  // namespace semdrive
