#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "semdrive/env.hpp"
#include "semdrive/policy_net.hpp"
#include "semdrive/rmsprop.hpp"

namespace semdrive {

/// R_t = r_t + discount * R_{t+1}, seeded with R_T = bootstrap. Oldest first.
std::vector<double> n_step_returns(std::span<const double> rewards, double bootstrap,
                                   double discount);

/// A_t = R_t - V_t. Throws std::invalid_argument on length mismatch.
std::vector<double> compute_advantages(std::span<const double> returns,
                                       std::span<const double> values);

enum class SamplingMode { Stochastic, Greedy };

/// Inverse-CDF draw from a categorical distribution; never returns an action
/// with zero probability.
Action sample_action(std::span<const double> policy, std::mt19937_64& rng);

/// Argmax with ties broken by the lowest action index.
Action greedy_action(std::span<const double> policy);

struct RolloutStep {
  FrameStack state;
  Action action = Action::Straight;
  double reward = 0.0;
  double value = 0.0;
  double action_prob = 0.0;
};

struct RolloutBuffer {
  std::vector<RolloutStep> steps;
  bool terminal = false;
  double bootstrap_value = 0.0;  // 0 when terminal, else V(next state)

  std::vector<double> rewards() const;
  std::vector<double> values() const;
};

/// Runs up to `t_max` steps of `env` under `params`, stopping early when the
/// episode ends. `env` must be mid-episode.
RolloutBuffer collect_rollout(DrivingEnv& env, const NetworkParams& params, int t_max,
                              std::mt19937_64& rng, SamplingMode mode = SamplingMode::Stochastic);

/// Turns a rollout into a loss batch (returns and advantages filled in).
RolloutBatch make_batch(const RolloutBuffer& rollout, double discount);

struct TrainerConfig {
  int n_workers = 12;
  int t_max = 5;
  double discount = 0.99;
  std::uint64_t total_steps = 300'000;
  std::uint64_t seed = 0;
  double clip_norm = 40.0;
  LossWeights loss;
  std::uint64_t checkpoint_every = 0;  // environment steps; 0 disables

  void validate() const;
};

struct EpisodeRecord {
  std::uint64_t episode = 0;
  int worker = 0;
  std::int64_t steps = 0;
  double total_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double wall_ms = 0.0;
};

struct TrainingReport {
  std::vector<EpisodeRecord> episodes;
  std::uint64_t steps = 0;
  std::uint64_t updates_applied = 0;
  std::uint64_t updates_skipped = 0;
};

struct TrainHooks {
  /// Called once per finished episode, serialized across workers.
  std::function<void(const EpisodeRecord&)> on_episode;
  /// Called with a global snapshot each time the step counter crosses a
  /// multiple of `checkpoint_every`, serialized across workers.
  std::function<void(std::uint64_t steps, const NetworkParams&)> on_checkpoint;
};

struct TrainResult {
  TrainingReport report;
  NetworkParams final_params;
};

/// Asynchronous advantage actor-critic. Each worker repeatedly snapshots the
/// global parameters, collects a rollout on its own environment, computes the
/// loss gradient on its snapshot, clips it, and applies it to the shared
/// RMSProp store. Throws std::runtime_error naming the worker on failure.
TrainResult train(const TrainerConfig& cfg, const EnvConfig& env, const OptimizerConfig& opt,
                  const TrainHooks& hooks = {}, const NetArch& arch = NetArch::standard());

/// Total reward of each of `episodes` episodes under a uniformly random policy.
std::vector<double> uniform_policy_episode_rewards(const EnvConfig& env, int episodes,
                                                   std::uint64_t seed);

}  // namespace semdrive
