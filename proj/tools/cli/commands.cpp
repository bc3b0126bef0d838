#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "semdrive/checkpoint.hpp"
#include "semdrive/eval.hpp"
#include "semdrive/file_util.hpp"
#include "semdrive/log.hpp"
#include "semdrive/manifest.hpp"
#include "semdrive/pgm.hpp"
#include "semdrive/track_io.hpp"

namespace semdrive::cli {

namespace fs = std::filesystem;

namespace {

NetArch arch_for(const RenderConfig& render) {
  NetArch arch = NetArch::standard();
  arch.in_size = render.resolution;
  return arch;
}

/// Runs `body`, mapping exceptions onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

double parse_double_field(std::string_view text, std::size_t row, const char* column) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ValidationError("metrics row " + std::to_string(row) + ": column " + column +
                          " is not a number");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t c = line.find(',', start);
    out.push_back(line.substr(start, c == std::string_view::npos ? c : c - start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

}  // namespace

std::string format_metrics_row(const EpisodeRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%llu,%d,%lld,%.17g,%.17g,%.17g,%.17g,%.3f",
                static_cast<unsigned long long>(r.episode), r.worker,
                static_cast<long long>(r.steps), r.total_reward, r.policy_loss, r.value_loss,
                r.entropy, r.wall_ms);
  return buf;
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_run_config(args.config);
    apply_overrides(cfg, args.overrides);
    cfg.validate();
    TrackSpec track = load_config_track(cfg);
    if (args.dump_config) write_file_atomic(*args.dump_config, run_config_to_json(cfg));

    try {
      ensure_directory(cfg.out / "checkpoints");
    } catch (const std::runtime_error& e) {
      throw ValidationError(std::string("out: ") + e.what());
    }
    write_file_atomic(cfg.out / "effective_config.json", run_config_to_json(cfg));

    std::ofstream metrics(cfg.out / "metrics.csv", std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot write " + (cfg.out / "metrics.csv").string());
    metrics << kMetricsHeader << "\n" << std::flush;

    TrainHooks hooks;
    hooks.on_episode = [&metrics](const EpisodeRecord& r) {
      metrics << format_metrics_row(r) << "\n" << std::flush;
    };
    const fs::path ckpt_dir = cfg.out / "checkpoints";
    hooks.on_checkpoint = [&ckpt_dir](std::uint64_t steps, const NetworkParams& params) {
      save_checkpoint(ckpt_dir / ("step_" + std::to_string(steps) + ".json"), params);
      log::info("checkpoint at step " + std::to_string(steps));
    };

    log::info("training: " + std::to_string(cfg.trainer.n_workers) + " workers, " +
              std::to_string(cfg.trainer.total_steps) + " steps, seed " +
              std::to_string(cfg.seed));
    const TrainResult result =
        train(cfg.trainer, env_config(cfg, std::move(track)), cfg.optimizer, hooks,
              arch_for(cfg.render));
    save_checkpoint(cfg.out / "final_checkpoint.json", result.final_params);

    out << "episodes: " << result.report.episodes.size() << "\n"
        << "steps: " << result.report.steps << "\n"
        << "updates applied: " << result.report.updates_applied
        << "  skipped: " << result.report.updates_skipped << "\n"
        << "metrics: " << (cfg.out / "metrics.csv").string() << "\n"
        << "checkpoint: " << (cfg.out / "final_checkpoint.json").string() << "\n";
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RenderConfig render;
    if (args.config) render = load_run_config(*args.config).render;
    try {
      render.validate();
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    if (!fs::exists(args.checkpoint)) {
      throw ValidationError("checkpoint not found: " + args.checkpoint.string());
    }
    if (!fs::exists(args.manifest)) {
      throw ValidationError("manifest not found: " + args.manifest.string());
    }
    const NetworkParams params = load_checkpoint(args.checkpoint, arch_for(render));
    const std::vector<EvalRecord> records = read_manifest(args.manifest);
    if (records.empty()) throw ValidationError("empty manifest");

    const FrameResolver frames(render, std::nullopt, args.manifest.parent_path());
    const EvalReport report = evaluate(params, records, frames);

    out << format_report_table(report);
    const fs::path csv_path =
        args.out ? *args.out : args.manifest.parent_path() / "eval_report.csv";
    write_file_atomic(csv_path, report_to_csv(report));
    out << "report: " << csv_path.string() << "\n";
    return kExitOk;
  });
}

int cmd_gen_dataset(const GenDatasetArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.n < 1) throw ValidationError("n: must be >= 1");
    SimConfig sim;
    RenderConfig render;
    if (args.config) {
      const RunConfig cfg = load_run_config(*args.config);
      sim = cfg.sim;
      render = cfg.render;
    }
    TrackSpec track;
    try {
      track = load_track(args.track);
    } catch (const std::exception& e) {
      throw ValidationError(e.what());
    }

    const GeneratedDataset data = generate_eval_manifest(track, args.n, args.seed, sim, render);

    ensure_directory(args.out / "frames");
    std::vector<EvalRecord> rows;
    rows.reserve(data.records.size());
    for (std::size_t i = 0; i < data.records.size(); ++i) {
      const fs::path rel = fs::path("frames") / (data.records[i].frame_id + ".pgm");
      write_pgm(args.out / rel, data.frames[i]);
      rows.push_back({data.records[i].frame_id, data.records[i].angle_degrees, rel});
    }
    write_file_atomic(args.out / "manifest.csv", manifest_to_csv(rows));
    out << "wrote " << rows.size() << " frames and " << (args.out / "manifest.csv").string()
        << "\n";
    return kExitOk;
  });
}

std::vector<EpisodeRecord> parse_metrics(std::string_view csv) {
  std::vector<EpisodeRecord> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kMetricsHeader) {
        throw ValidationError("metrics row 1: expected header '" + std::string(kMetricsHeader) +
                              "'");
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string_view> f = split_commas(line);
    if (f.size() != 8) {
      throw ValidationError("metrics row " + std::to_string(line_no) + ": expected 8 columns, got " +
                            std::to_string(f.size()));
    }
    EpisodeRecord r;
    const double episode = parse_double_field(f[0], line_no, "episode");
    const double worker = parse_double_field(f[1], line_no, "worker");
    const double steps = parse_double_field(f[2], line_no, "steps");
    if (episode < 0 || std::floor(episode) != episode || worker < 0 ||
        std::floor(worker) != worker || steps < 0 || std::floor(steps) != steps) {
      throw ValidationError("metrics row " + std::to_string(line_no) +
                            ": episode, worker and steps must be non-negative integers");
    }
    r.episode = static_cast<std::uint64_t>(episode);
    r.worker = static_cast<int>(worker);
    r.steps = static_cast<std::int64_t>(steps);
    r.total_reward = parse_double_field(f[3], line_no, "total_reward");
    r.policy_loss = parse_double_field(f[4], line_no, "policy_loss");
    r.value_loss = parse_double_field(f[5], line_no, "value_loss");
    r.entropy = parse_double_field(f[6], line_no, "entropy");
    r.wall_ms = parse_double_field(f[7], line_no, "wall_ms");
    if (!std::isfinite(r.total_reward) || !std::isfinite(r.entropy)) {
      throw ValidationError("metrics row " + std::to_string(line_no) + ": non-finite value");
    }
    rows.push_back(r);
  }
  if (!header_seen) throw ValidationError("metrics: missing header");
  return rows;
}

std::vector<WindowSummary> summarize_windows(const std::vector<EpisodeRecord>& rows,
                                             std::size_t window) {
  if (window == 0) throw ValidationError("window: must be >= 1");
  std::vector<WindowSummary> out;
  for (std::size_t start = 0; start < rows.size(); start += window) {
    const std::size_t stop = std::min(rows.size(), start + window);
    WindowSummary w;
    w.window = out.size();
    w.first_episode = rows[start].episode;
    w.last_episode = rows[stop - 1].episode;
    w.episodes = stop - start;
    w.min_reward = std::numeric_limits<double>::infinity();
    w.max_reward = -std::numeric_limits<double>::infinity();
    double reward_sum = 0.0;
    double entropy_sum = 0.0;
    for (std::size_t i = start; i < stop; ++i) {
      reward_sum += rows[i].total_reward;
      entropy_sum += rows[i].entropy;
      w.min_reward = std::min(w.min_reward, rows[i].total_reward);
      w.max_reward = std::max(w.max_reward, rows[i].total_reward);
    }
    w.mean_reward = reward_sum / static_cast<double>(w.episodes);
    w.mean_entropy = entropy_sum / static_cast<double>(w.episodes);
    out.push_back(w);
  }
  return out;
}

std::string summary_to_csv(const std::vector<WindowSummary>& windows) {
  std::string out =
      "window,first_episode,last_episode,episodes,mean_reward,min_reward,max_reward,mean_entropy\n";
  char buf[512];
  for (const WindowSummary& w : windows) {
    std::snprintf(buf, sizeof buf, "%zu,%llu,%llu,%zu,%.17g,%.17g,%.17g,%.17g\n", w.window,
                  static_cast<unsigned long long>(w.first_episode),
                  static_cast<unsigned long long>(w.last_episode), w.episodes, w.mean_reward,
                  w.min_reward, w.max_reward, w.mean_entropy);
    out += buf;
  }
  return out;
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::exists(args.metrics)) {
      throw ValidationError("metrics file not found: " + args.metrics.string());
    }
    const std::vector<EpisodeRecord> rows = parse_metrics(read_file(args.metrics));
    const std::string csv = summary_to_csv(summarize_windows(rows, args.window));
    if (args.out) {
      write_file_atomic(*args.out, csv);
    } else {
      out << csv;
    }
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  log::init_from_env();

  CLI::App app{"semdrive: semantic-layout driving simulator and A3C trainer"};
  app.require_subcommand(1);

  TrainArgs train_args;
  int workers = 0;
  std::uint64_t seed = 0;
  std::uint64_t total_steps = 0;
  std::string track_override;
  std::string out_override;
  std::string dump_config;
  auto* train_cmd = app.add_subcommand("train", "Run A3C training from a JSON config");
  train_cmd->add_option("--config", train_args.config, "Run config JSON")->required();
  auto* workers_opt = train_cmd->add_option("--workers", workers, "Number of worker threads");
  auto* seed_opt = train_cmd->add_option("--seed", seed, "Random seed");
  auto* steps_opt = train_cmd->add_option("--total-steps", total_steps, "Environment step budget");
  auto* track_opt = train_cmd->add_option("--track", track_override, "Track JSON file");
  auto* out_opt = train_cmd->add_option("--out", out_override, "Output directory");
  auto* dump_opt = train_cmd->add_option("--dump-config", dump_config,
                                         "Write the effective config to this file");

  EvalArgs eval_args;
  std::string eval_config;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a labeled frame manifest");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint JSON")->required();
  eval_cmd->add_option("--manifest", eval_args.manifest, "Manifest CSV")->required();
  auto* eval_config_opt = eval_cmd->add_option("--config", eval_config, "Run config for render settings");
  auto* eval_out_opt = eval_cmd->add_option("--out", eval_out, "Report CSV path");

  GenDatasetArgs gen_args;
  std::string gen_config;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "Generate labeled frames with a scripted driver");
  gen_cmd->add_option("--track", gen_args.track, "Track JSON file")->required();
  gen_cmd->add_option("--n", gen_args.n, "Number of frames")->required();
  gen_cmd->add_option("--seed", gen_args.seed, "Random seed");
  gen_cmd->add_option("--out", gen_args.out, "Output directory")->required();
  auto* gen_config_opt = gen_cmd->add_option("--config", gen_config, "Run config for sim/render settings");

  ReportArgs report_args;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Summarize a metrics CSV in episode windows");
  report_cmd->add_option("--metrics", report_args.metrics, "Metrics CSV")->required();
  report_cmd->add_option("--window", report_args.window, "Episodes per window");
  auto* report_out_opt = report_cmd->add_option("--out", report_out, "Summary CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  if (train_cmd->parsed()) {
    if (*workers_opt) train_args.overrides.workers = workers;
    if (*seed_opt) train_args.overrides.seed = seed;
    if (*steps_opt) train_args.overrides.total_steps = total_steps;
    if (*track_opt) train_args.overrides.track = fs::path(track_override);
    if (*out_opt) train_args.overrides.out = fs::path(out_override);
    if (*dump_opt) train_args.dump_config = fs::path(dump_config);
    return cmd_train(train_args, out, err);
  }
  if (eval_cmd->parsed()) {
    if (*eval_config_opt) eval_args.config = fs::path(eval_config);
    if (*eval_out_opt) eval_args.out = fs::path(eval_out);
    return cmd_eval(eval_args, out, err);
  }
  if (gen_cmd->parsed()) {
    if (*gen_config_opt) gen_args.config = fs::path(gen_config);
    return cmd_gen_dataset(gen_args, out, err);
  }
  if (*report_out_opt) report_args.out = fs::path(report_out);
  return cmd_report(report_args, out, err);
}

}  // namespace semdrive::cli
