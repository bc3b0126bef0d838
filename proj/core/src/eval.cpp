#include "semdrive/eval.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "semdrive/pgm.hpp"

namespace semdrive {

std::string_view steering_class_name(SteeringClass c) {
  switch (c) {
    case SteeringClass::Left: return "left";
    case SteeringClass::Straight: return "straight";
    case SteeringClass::Right: return "right";
  }
  return "?";
}

SteeringClass angle_to_class(double angle_degrees) {
  if (!std::isfinite(angle_degrees)) {
    throw std::invalid_argument("steering angle must be finite");
  }
  if (angle_degrees < -15.0) return SteeringClass::Left;
  if (angle_degrees > 15.0) return SteeringClass::Right;
  return SteeringClass::Straight;
}

SteeringClass collapse_action(Action action) {
  switch (steer_of(action)) {
    case Steer::Left: return SteeringClass::Left;
    case Steer::Right: return SteeringClass::Right;
    case Steer::Straight: break;
  }
  return SteeringClass::Straight;
}

Action predict(const NetworkParams& params, const FrameStack& stack) {
  const ForwardOutput out = forward(params, stack);
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.policy.size(); ++i) {
    if (out.policy[i] > out.policy[best]) best = i;
  }
  return action_from_index(static_cast<int>(best));
}

FrameResolver::FrameResolver(RenderConfig render, std::optional<TrackSpec> track,
                             std::filesystem::path base_dir)
    : render_(render), track_(std::move(track)), base_dir_(std::move(base_dir)) {}

SemanticFrame FrameResolver::load(const EvalRecord& record) const {
  if (const auto* path = std::get_if<std::filesystem::path>(&record.frame_source)) {
    const std::filesystem::path full = path->is_absolute() ? *path : base_dir_ / *path;
    SemanticFrame frame = read_pgm(full);
    if (frame.width != render_.resolution || frame.height != render_.resolution) {
      throw std::runtime_error(full.string() + ": frame is " + std::to_string(frame.width) + "x" +
                               std::to_string(frame.height) + ", expected " +
                               std::to_string(render_.resolution));
    }
    return frame;
  }
  if (!track_) throw std::runtime_error("record " + record.frame_id + ": no track to render on");
  return render(*track_, std::get<VehicleState>(record.frame_source), render_);
}

namespace {

struct SequenceKey {
  std::string prefix;
  long index = -1;
  std::size_t digits = 0;
};

std::optional<SequenceKey> split_frame_id(const std::string& id) {
  const std::size_t cut = id.rfind('_');
  if (cut == std::string::npos || cut + 1 >= id.size()) return std::nullopt;
  SequenceKey key;
  key.prefix = id.substr(0, cut);
  const char* first = id.data() + cut + 1;
  const char* last = id.data() + id.size();
  const auto [ptr, ec] = std::from_chars(first, last, key.index);
  if (ec != std::errc{} || ptr != last || key.index < 0) return std::nullopt;
  key.digits = id.size() - cut - 1;
  return key;
}

std::string frame_id_for(const SequenceKey& key, long index) {
  std::string num = std::to_string(index);
  if (num.size() < key.digits) num.insert(0, key.digits - num.size(), '0');
  return key.prefix + "_" + num;
}

}  // namespace

EvalReport evaluate(const Predictor& predictor, std::span<const EvalRecord> manifest,
                    const FrameResolver& frames) {
  if (manifest.empty()) throw std::invalid_argument("empty manifest");

  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < manifest.size(); ++i) by_id.emplace(manifest[i].frame_id, i);

  std::vector<std::optional<SemanticFrame>> loaded(manifest.size());
  std::vector<bool> attempted(manifest.size(), false);
  auto frame_at = [&](std::size_t i) -> const std::optional<SemanticFrame>& {
    if (!attempted[i]) {
      attempted[i] = true;
      try {
        loaded[i] = frames.load(manifest[i]);
      } catch (const std::exception&) {
        loaded[i].reset();
      }
    }
    return loaded[i];
  };

  EvalReport report;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const EvalRecord& rec = manifest[i];
    const std::optional<SemanticFrame>& current = frame_at(i);
    if (!current || !std::isfinite(rec.angle_degrees)) {
      ++report.n_skipped;
      report.skipped_ids.push_back(rec.frame_id);
      continue;
    }

    FrameStack stack(*current);
    if (const auto key = split_frame_id(rec.frame_id); key && key->index >= FrameStack::kDepth - 1) {
      std::vector<const SemanticFrame*> history;
      for (long back = FrameStack::kDepth - 1; back >= 1; --back) {
        const auto it = by_id.find(frame_id_for(*key, key->index - back));
        if (it == by_id.end()) break;
        const std::optional<SemanticFrame>& f = frame_at(it->second);
        if (!f) break;
        history.push_back(&*f);
      }
      if (history.size() == FrameStack::kDepth - 1) {
        stack = FrameStack(*history[0]);
        for (std::size_t h = 1; h < history.size(); ++h) stack.push(*history[h]);
        stack.push(*current);
      }
    }

    const SteeringClass truth = angle_to_class(rec.angle_degrees);
    const SteeringClass guess = collapse_action(predictor(stack, rec));
    ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(guess)];
    ++report.n_records;
    if (truth == guess) ++report.n_correct;
  }
  report.accuracy = report.n_records == 0
                        ? 0.0
                        : static_cast<double>(report.n_correct) / static_cast<double>(report.n_records);
  return report;
}

EvalReport evaluate(const NetworkParams& params, std::span<const EvalRecord> manifest,
                    const FrameResolver& frames) {
  return evaluate([&params](const FrameStack& stack, const EvalRecord&) { return predict(params, stack); },
                  manifest, frames);
}

std::string format_report_table(const EvalReport& r) {
  std::ostringstream out;
  out << "records scored: " << r.n_records << "  skipped: " << r.n_skipped << "\n";
  out << "accuracy: " << std::fixed << std::setprecision(4) << r.accuracy << " (" << r.n_correct
      << "/" << r.n_records << ")\n\n";
  out << std::left << std::setw(12) << "truth\\pred";
  for (SteeringClass c : kAllSteeringClasses) out << std::right << std::setw(10) << steering_class_name(c);
  out << "\n";
  for (SteeringClass t : kAllSteeringClasses) {
    out << std::left << std::setw(12) << steering_class_name(t);
    for (SteeringClass p : kAllSteeringClasses) {
      out << std::right << std::setw(10)
          << r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    out << "\n";
  }
  return out.str();
}

std::string report_to_csv(const EvalReport& r) {
  std::ostringstream out;
  out << std::setprecision(6) << std::fixed;
  out << "class,support,correct,accuracy,pred_left,pred_straight,pred_right\n";
  std::array<std::size_t, 3> col_totals{};
  for (SteeringClass t : kAllSteeringClasses) {
    const auto& row = r.confusion[static_cast<std::size_t>(t)];
    const std::size_t support = row[0] + row[1] + row[2];
    const std::size_t correct = row[static_cast<std::size_t>(t)];
    const double acc = support == 0 ? 0.0 : static_cast<double>(correct) / support;
    out << steering_class_name(t) << "," << support << "," << correct << "," << acc << ","
        << row[0] << "," << row[1] << "," << row[2] << "\n";
    for (std::size_t p = 0; p < 3; ++p) col_totals[p] += row[p];
  }
  out << "all," << r.n_records << "," << r.n_correct << "," << r.accuracy << "," << col_totals[0]
      << "," << col_totals[1] << "," << col_totals[2] << "\n";
  out << "skipped," << r.n_skipped << ",,,,,\n";
  return out.str();
}

ControlOutput pure_pursuit(const TrackSpec& track, const VehicleState& state,
                           const PurePursuitConfig& cfg) {
  const TrackProjection proj = project_to_track(track, state.position);
  const Vec2 target = point_at_arc_length(track, proj.arc_length + cfg.lookahead).position;
  const Vec2 to_target = target - state.position;
  const double dist = norm(to_target);

  ControlOutput out;
  if (dist > 0.0) {
    const double eta = normalize_angle(std::atan2(to_target.y, to_target.x) - state.heading);
    out.curvature = 2.0 * std::sin(eta) / dist;
  }
  const double wheel = std::atan(cfg.wheelbase * out.curvature);
  out.steering_degrees = -wheel * cfg.steering_ratio * 180.0 / std::numbers::pi;

  const double yaw_rate = std::max(state.speed, 1.0) * out.curvature;
  Steer steer = Steer::Straight;
  if (yaw_rate > cfg.yaw_deadband) {
    steer = Steer::Left;
  } else if (yaw_rate < -cfg.yaw_deadband) {
    steer = Steer::Right;
  }
  Throttle throttle = Throttle::Neutral;
  if (state.speed < cfg.target_speed - 0.5) {
    throttle = Throttle::Accel;
  } else if (state.speed > cfg.target_speed + 1.0) {
    throttle = Throttle::Brake;
  }
  out.action = make_action(throttle, steer);
  return out;
}

GeneratedDataset generate_eval_manifest(const TrackSpec& track, std::size_t n, std::uint64_t seed,
                                        const SimConfig& sim, const RenderConfig& render_cfg,
                                        const PurePursuitConfig& controller) {
  if (n < 1) throw std::invalid_argument("generate_eval_manifest: n must be >= 1");
  track.validate();
  sim.validate();
  render_cfg.validate();

  std::mt19937_64 rng(seed);
  GeneratedDataset out;
  out.records.reserve(n);
  out.frames.reserve(n);

  int sequence = 0;
  long index = 0;
  VehicleState state = reset(track, sim, rng());
  auto make_id = [](int seq, long idx) {
    std::ostringstream id;
    id << "e" << std::setw(4) << std::setfill('0') << seq << "_" << std::setw(6) << idx;
    return id.str();
  };

  for (std::size_t i = 0; i < n; ++i) {
    const ControlOutput ctl = pure_pursuit(track, state, controller);
    out.records.push_back({make_id(sequence, index), ctl.steering_degrees, state});
    out.frames.push_back(render(track, state, render_cfg));

    const StepResult next = step(state, ctl.action, track, sim);
    if (next.done) {
      ++sequence;
      index = 0;
      state = reset(track, sim, rng());
    } else {
      state = next.state;
      ++index;
    }
  }
  return out;
}

}  // namespace semdrive
