#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "semdrive/a3c.hpp"
#include "semdrive/env.hpp"
#include "semdrive/render.hpp"
#include "semdrive/rmsprop.hpp"
#include "semdrive/sim.hpp"

namespace semdrive::cli {

/// Bad user input: exits with status 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path track;
  std::filesystem::path out = "run";
  std::uint64_t seed = 0;
  TrainerConfig trainer;
  OptimizerConfig optimizer;
  SimConfig sim;
  RenderConfig render;
  RewardParams reward;

  /// Checks every component; throws ValidationError naming the field.
  void validate() const;
};

struct Overrides {
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> total_steps;
  std::optional<std::filesystem::path> track;
  std::optional<std::filesystem::path> out;
};

/// Missing keys keep their defaults; unknown keys and wrong types are
/// rejected. Relative track/out paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Writes every effective value, paths made absolute.
std::string run_config_to_json(const RunConfig& cfg);

void apply_overrides(RunConfig& cfg, const Overrides& overrides);

/// Reads the track file named by the config, reporting the path on failure.
TrackSpec load_config_track(const RunConfig& cfg);

EnvConfig env_config(const RunConfig& cfg, TrackSpec track);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace semdrive::cli
