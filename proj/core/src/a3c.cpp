#include "semdrive/a3c.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "semdrive/log.hpp"

namespace semdrive {

std::vector<double> n_step_returns(std::span<const double> rewards, double bootstrap,
                                   double discount) {
  std::vector<double> returns(rewards.size());
  double running = bootstrap;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    running = rewards[i] + discount * running;
    returns[i] = running;
  }
  return returns;
}

std::vector<double> compute_advantages(std::span<const double> returns,
                                       std::span<const double> values) {
  if (returns.size() != values.size()) {
    throw std::invalid_argument("advantages: " + std::to_string(returns.size()) +
                                " returns vs " + std::to_string(values.size()) + " values");
  }
  std::vector<double> out(returns.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = returns[i] - values[i];
  return out;
}

Action sample_action(std::span<const double> policy, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    if (policy[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    cumulative += policy[i];
    if (u < cumulative) return action_from_index(static_cast<int>(i));
  }
  // Rounding left u above the accumulated mass.
  return action_from_index(last_positive);
}

Action greedy_action(std::span<const double> policy) {
  const auto it = std::max_element(policy.begin(), policy.end());
  return action_from_index(static_cast<int>(it - policy.begin()));
}

std::vector<double> RolloutBuffer::rewards() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const RolloutStep& s : steps) out.push_back(s.reward);
  return out;
}

std::vector<double> RolloutBuffer::values() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const RolloutStep& s : steps) out.push_back(s.value);
  return out;
}

RolloutBuffer collect_rollout(DrivingEnv& env, const NetworkParams& params, int t_max,
                              std::mt19937_64& rng, SamplingMode mode) {
  if (env.done()) throw std::logic_error("collect_rollout: environment needs a reset");
  RolloutBuffer buffer;
  buffer.steps.reserve(static_cast<std::size_t>(std::max(t_max, 0)));
  for (int t = 0; t < t_max; ++t) {
    const ForwardOutput fwd = forward(params, env.observation());
    const Action action = mode == SamplingMode::Greedy ? greedy_action(fwd.policy)
                                                       : sample_action(fwd.policy, rng);
    RolloutStep step;
    step.state = env.observation();
    step.action = action;
    step.value = fwd.value;
    step.action_prob = fwd.policy[static_cast<std::size_t>(action_index(action))];
    const EnvStep result = env.step(action);
    step.reward = result.reward;
    buffer.steps.push_back(std::move(step));
    if (result.done) {
      buffer.terminal = true;
      break;
    }
  }
  if (!buffer.terminal && !buffer.steps.empty()) {
    buffer.bootstrap_value = forward(params, env.observation()).value;
  }
  return buffer;
}

RolloutBatch make_batch(const RolloutBuffer& rollout, double discount) {
  const std::vector<double> rewards = rollout.rewards();
  const std::vector<double> values = rollout.values();
  RolloutBatch batch;
  batch.returns = n_step_returns(rewards, rollout.bootstrap_value, discount);
  batch.advantages = compute_advantages(batch.returns, values);
  for (const RolloutStep& s : rollout.steps) {
    batch.states.push_back(s.state);
    batch.actions.push_back(s.action);
  }
  return batch;
}

void TrainerConfig::validate() const {
  if (n_workers < 1) throw std::invalid_argument("trainer.n_workers: must be >= 1");
  if (t_max < 1) throw std::invalid_argument("trainer.t_max: must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw std::invalid_argument("trainer.discount: must be in (0, 1]");
  }
  if (!(clip_norm > 0.0)) throw std::invalid_argument("trainer.clip_norm: must be > 0");
  if (!(loss.value >= 0.0) || !(loss.entropy >= 0.0)) {
    throw std::invalid_argument("trainer.loss: weights must be >= 0");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

std::mt19937_64 worker_rng(std::uint64_t seed, int worker) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(worker), 0x5eedu};
  return std::mt19937_64(seq);
}

class Trainer {
 public:
  Trainer(const TrainerConfig& cfg, const EnvConfig& env, const OptimizerConfig& opt,
          const TrainHooks& hooks, const NetArch& arch)
      : cfg_(cfg), env_(env), hooks_(hooks), store_(init_params(cfg.seed, arch), opt) {}

  TrainResult run() {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg_.n_workers));
    threads.reserve(errors.size());
    for (int w = 0; w < cfg_.n_workers; ++w) {
      threads.emplace_back([this, w, &errors] {
        try {
          worker(w);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
          stop_.store(true);
        }
      });
    }
    for (std::thread& t : threads) t.join();

    for (std::size_t w = 0; w < errors.size(); ++w) {
      if (!errors[w]) continue;
      std::string what = "unknown error";
      try {
        std::rethrow_exception(errors[w]);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      throw std::runtime_error("worker " + std::to_string(w) + " failed: " + what);
    }

    TrainResult result;
    result.report.episodes = std::move(episodes_);
    result.report.steps = steps_done_.load();
    result.report.updates_applied = store_.applied();
    result.report.updates_skipped = store_.skipped() + numeric_skips_.load();
    result.final_params = store_.snapshot();
    return result;
  }

 private:
  int reserve_steps() {
    std::uint64_t cur = reserved_.load();
    for (;;) {
      if (stop_.load() || cur >= cfg_.total_steps) return 0;
      const auto n = std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg_.t_max),
                                             cfg_.total_steps - cur);
      if (reserved_.compare_exchange_weak(cur, cur + n)) return static_cast<int>(n);
    }
  }

  void worker(int id) {
    std::mt19937_64 rng = worker_rng(cfg_.seed, id);
    DrivingEnv env(env_);

    EpisodeRecord ep;
    double loss_sums[3] = {0.0, 0.0, 0.0};
    int updates = 0;
    Clock::time_point started{};

    for (;;) {
      if (env.done()) {
        env.reset(rng());
        ep = EpisodeRecord{};
        ep.worker = id;
        loss_sums[0] = loss_sums[1] = loss_sums[2] = 0.0;
        updates = 0;
        started = Clock::now();
      }
      const int budget = reserve_steps();
      if (budget == 0) return;

      const NetworkParams local = store_.snapshot();
      const RolloutBuffer rollout = collect_rollout(env, local, budget, rng);
      const auto used = static_cast<std::uint64_t>(rollout.steps.size());
      reserved_.fetch_sub(static_cast<std::uint64_t>(budget) - used);
      const std::uint64_t before = steps_done_.fetch_add(used);
      const std::uint64_t after = before + used;

      ep.steps += static_cast<std::int64_t>(used);
      for (const RolloutStep& s : rollout.steps) ep.total_reward += s.reward;

      try {
        LossResult lr = loss_and_grad(local, make_batch(rollout, cfg_.discount), cfg_.loss);
        clip_global_norm(lr.grads, cfg_.clip_norm);
        if (store_.apply(lr.grads)) {
          loss_sums[0] += lr.policy_loss;
          loss_sums[1] += lr.value_loss;
          loss_sums[2] += lr.entropy;
          ++updates;
        }
      } catch (const NumericalError& e) {
        numeric_skips_.fetch_add(1);
        log::error("worker " + std::to_string(id) + ": skipping update, " + e.what());
      }

      if (cfg_.checkpoint_every > 0 && hooks_.on_checkpoint &&
          before / cfg_.checkpoint_every != after / cfg_.checkpoint_every) {
        const NetworkParams snap = store_.snapshot();
        std::lock_guard lock(hook_mutex_);
        hooks_.on_checkpoint(after, snap);
      }

      if (rollout.terminal) {
        if (updates > 0) {
          ep.policy_loss = loss_sums[0] / updates;
          ep.value_loss = loss_sums[1] / updates;
          ep.entropy = loss_sums[2] / updates;
        }
        ep.wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - started).count();
        std::lock_guard lock(hook_mutex_);
        ep.episode = episodes_.size();
        episodes_.push_back(ep);
        if (hooks_.on_episode) hooks_.on_episode(ep);
        log::debug("episode " + std::to_string(ep.episode) + " worker " + std::to_string(id) +
                   " steps " + std::to_string(ep.steps) + " reward " +
                   std::to_string(ep.total_reward));
      }
    }
  }

  const TrainerConfig& cfg_;
  const EnvConfig& env_;
  const TrainHooks& hooks_;
  SharedParameterStore store_;

  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> reserved_{0};
  std::atomic<std::uint64_t> steps_done_{0};
  std::atomic<std::uint64_t> numeric_skips_{0};

  std::mutex hook_mutex_;
  std::vector<EpisodeRecord> episodes_;
};

}  // namespace

TrainResult train(const TrainerConfig& cfg, const EnvConfig& env, const OptimizerConfig& opt,
                  const TrainHooks& hooks, const NetArch& arch) {
  cfg.validate();
  env.validate();
  opt.validate();
  if (arch.in_size != env.render.resolution) {
    throw std::invalid_argument("network input size " + std::to_string(arch.in_size) +
                                " does not match render resolution " +
                                std::to_string(env.render.resolution));
  }
  Trainer trainer(cfg, env, opt, hooks, arch);
  return trainer.run();
}

std::vector<double> uniform_policy_episode_rewards(const EnvConfig& env, int episodes,
                                                   std::uint64_t seed) {
  env.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, kActionCount - 1);
  std::vector<double> totals;
  totals.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int e = 0; e < episodes; ++e) {
    VehicleState state = reset(env.track, env.sim, rng());
    double total = 0.0;
    for (;;) {
      const StepResult r = step(state, action_from_index(pick(rng)), env.track, env.sim);
      state = r.state;
      total += compute_reward(state.speed, r.relative.alpha, r.relative.dist_center, r.collided,
                              env.reward);
      if (r.done) break;
    }
    totals.push_back(total);
  }
  return totals;
}

}  // namespace semdrive
