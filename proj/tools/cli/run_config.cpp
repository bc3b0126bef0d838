#include "run_config.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <set>

#include "json.hpp"
#include "semdrive/file_util.hpp"
#include "semdrive/track_io.hpp"

namespace semdrive::cli {

using nlohmann::json;

namespace {

/// Typed access to one JSON object that rejects unknown keys.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!known_.count(key)) throw ValidationError(field(key) + ": unknown key");
    }
  }

  void number(const char* key, double& dst) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw ValidationError(field(key) + ": expected a finite number");
    }
    dst = v.get<double>();
  }

  template <typename Int>
  void integer(const char* key, Int& dst) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ValidationError(field(key) + ": expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
        dst = v.get<Int>();
        return;
      }
      throw ValidationError(field(key) + ": must be >= 0");
    } else {
      dst = v.get<Int>();
    }
  }

  void path(const char* key, std::filesystem::path& dst, const std::filesystem::path& base) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ValidationError(field(key) + ": expected a string");
    std::filesystem::path p = v.get<std::string>();
    dst = p.is_absolute() || base.empty() ? p : base / p;
  }

  std::optional<Section> child(const char* key) {
    if (!take(key)) return std::nullopt;
    return std::optional<Section>(std::in_place, obj_.at(key), field(key));
  }

 private:
  bool take(const char* key) {
    known_.insert(key);
    return obj_.contains(key);
  }
  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json& obj_;
  std::string path_;
  std::set<std::string, std::less<>> known_;
};

void rethrow_as_validation(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  rethrow_as_validation([this] {
    trainer.validate();
    optimizer.validate();
    sim.validate();
    render.validate();
    reward.validate();
  });
  if (track.empty()) throw ValidationError("track: a track file is required");
  if (out.empty()) throw ValidationError("out: an output directory is required");
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config JSON syntax error at line " +
                          std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)));
  }
  RunConfig cfg;
  {
    Section root(doc, "");
    root.path("track", cfg.track, base_dir);
    root.path("out", cfg.out, base_dir);
    root.integer("seed", cfg.seed);
    if (auto s = root.child("trainer")) {
      s->integer("workers", cfg.trainer.n_workers);
      s->integer("t_max", cfg.trainer.t_max);
      s->number("discount", cfg.trainer.discount);
      s->integer("total_steps", cfg.trainer.total_steps);
      s->number("clip_norm", cfg.trainer.clip_norm);
      s->integer("checkpoint_every", cfg.trainer.checkpoint_every);
      s->number("c_value", cfg.trainer.loss.value);
      s->number("c_entropy", cfg.trainer.loss.entropy);
      s->finish();
    }
    if (auto s = root.child("optimizer")) {
      s->number("learning_rate", cfg.optimizer.learning_rate);
      s->number("decay", cfg.optimizer.decay);
      s->number("epsilon", cfg.optimizer.epsilon);
      s->finish();
    }
    if (auto s = root.child("sim")) {
      s->number("dt", cfg.sim.dt);
      s->number("v_max", cfg.sim.v_max);
      s->number("accel", cfg.sim.accel);
      s->number("brake_decel", cfg.sim.brake_decel);
      s->number("steer_rate", cfg.sim.steer_rate);
      s->integer("max_steps", cfg.sim.max_steps);
      s->finish();
    }
    if (auto s = root.child("render")) {
      s->integer("resolution", cfg.render.resolution);
      s->number("view_ahead", cfg.render.view_ahead);
      s->number("view_half_width", cfg.render.view_half_width);
      s->number("marking_width", cfg.render.marking_width);
      s->number("ego_length", cfg.render.ego_length);
      s->number("ego_width", cfg.render.ego_width);
      s->finish();
    }
    if (auto s = root.child("reward")) {
      s->number("beta", cfg.reward.beta);
      s->number("gamma_collision", cfg.reward.gamma_collision);
      s->finish();
    }
    root.finish();
  }
  cfg.trainer.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("config file not found: " + path.string());
  }
  try {
    return parse_run_config(read_file(path), path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string run_config_to_json(const RunConfig& cfg) {
  const json doc = {
      {"track", std::filesystem::absolute(cfg.track).lexically_normal().string()},
      {"out", std::filesystem::absolute(cfg.out).lexically_normal().string()},
      {"seed", cfg.seed},
      {"trainer",
       {{"workers", cfg.trainer.n_workers},
        {"t_max", cfg.trainer.t_max},
        {"discount", cfg.trainer.discount},
        {"total_steps", cfg.trainer.total_steps},
        {"clip_norm", cfg.trainer.clip_norm},
        {"checkpoint_every", cfg.trainer.checkpoint_every},
        {"c_value", cfg.trainer.loss.value},
        {"c_entropy", cfg.trainer.loss.entropy}}},
      {"optimizer",
       {{"learning_rate", cfg.optimizer.learning_rate},
        {"decay", cfg.optimizer.decay},
        {"epsilon", cfg.optimizer.epsilon}}},
      {"sim",
       {{"dt", cfg.sim.dt},
        {"v_max", cfg.sim.v_max},
        {"accel", cfg.sim.accel},
        {"brake_decel", cfg.sim.brake_decel},
        {"steer_rate", cfg.sim.steer_rate},
        {"max_steps", cfg.sim.max_steps}}},
      {"render",
       {{"resolution", cfg.render.resolution},
        {"view_ahead", cfg.render.view_ahead},
        {"view_half_width", cfg.render.view_half_width},
        {"marking_width", cfg.render.marking_width},
        {"ego_length", cfg.render.ego_length},
        {"ego_width", cfg.render.ego_width}}},
      {"reward", {{"beta", cfg.reward.beta}, {"gamma_collision", cfg.reward.gamma_collision}}},
  };
  return doc.dump(2) + "\n";
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.workers) cfg.trainer.n_workers = *o.workers;
  if (o.seed) cfg.seed = *o.seed;
  if (o.total_steps) cfg.trainer.total_steps = *o.total_steps;
  if (o.track) cfg.track = *o.track;
  if (o.out) cfg.out = *o.out;
  cfg.trainer.seed = cfg.seed;
}

TrackSpec load_config_track(const RunConfig& cfg) {
  try {
    return load_track(cfg.track);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  } catch (const std::runtime_error& e) {
    throw ValidationError(e.what());
  }
}

EnvConfig env_config(const RunConfig& cfg, TrackSpec track) {
  return EnvConfig{std::move(track), cfg.sim, cfg.render, cfg.reward};
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  // Serialization covers every field and normalizes paths.
  return run_config_to_json(a) == run_config_to_json(b);
}

}  // namespace semdrive::cli
