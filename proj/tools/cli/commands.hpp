#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace semdrive::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;

inline constexpr std::string_view kMetricsHeader =
    "episode,worker,steps,total_reward,policy_loss,value_loss,entropy,wall_ms";

struct TrainArgs {
  std::filesystem::path config;
  Overrides overrides;
  std::optional<std::filesystem::path> dump_config;
};

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> config;  // render settings
  std::optional<std::filesystem::path> out;     // report CSV
};

struct GenDatasetArgs {
  std::filesystem::path track;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;  // sim and render settings
};

struct ReportArgs {
  std::filesystem::path metrics;
  std::size_t window = 100;
  std::optional<std::filesystem::path> out;  // stdout when absent
};

/// Each returns a process exit code: 0 ok, 1 runtime failure, 2 bad input.
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_gen_dataset(const GenDatasetArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

/// One metrics row, formatted as written by `train`.
std::string format_metrics_row(const EpisodeRecord& r);

struct WindowSummary {
  std::size_t window = 0;
  std::uint64_t first_episode = 0;
  std::uint64_t last_episode = 0;
  std::size_t episodes = 0;
  double mean_reward = 0.0;
  double min_reward = 0.0;
  double max_reward = 0.0;
  double mean_entropy = 0.0;
};

/// Parses a metrics CSV; throws ValidationError naming the bad row.
std::vector<EpisodeRecord> parse_metrics(std::string_view csv);

/// Consecutive windows of `window` rows; the last one may be shorter.
std::vector<WindowSummary> summarize_windows(const std::vector<EpisodeRecord>& rows,
                                             std::size_t window);
std::string summary_to_csv(const std::vector<WindowSummary>& windows);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semdrive::cli
