#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semdrive/policy_net.hpp"
#include "semdrive/render.hpp"
#include "semdrive/sim.hpp"

namespace semdrive {

enum class SteeringClass : std::uint8_t { Left = 0, Straight = 1, Right = 2 };

inline constexpr std::array<SteeringClass, 3> kAllSteeringClasses = {
    SteeringClass::Left, SteeringClass::Straight, SteeringClass::Right};

std::string_view steering_class_name(SteeringClass c);

/// [-15, 15] -> Straight, below -15 -> Left, above 15 -> Right (degrees,
/// negative is left). Throws std::invalid_argument for non-finite angles.
SteeringClass angle_to_class(double angle_degrees);

/// Drops the throttle component of an action.
SteeringClass collapse_action(Action action);

/// Argmax of the policy head, ties to the lowest action index.
Action predict(const NetworkParams& params, const FrameStack& stack);

struct EvalRecord {
  std::string frame_id;  // "<sequence>_<index>", e.g. "e0003_000017"
  double angle_degrees = 0.0;
  std::variant<std::filesystem::path, VehicleState> frame_source;
};

struct EvalReport {
  std::size_t n_records = 0;  // scored records
  std::size_t n_correct = 0;
  std::size_t n_skipped = 0;
  double accuracy = 0.0;
  /// confusion[truth][predicted], indexed by SteeringClass.
  std::array<std::array<std::size_t, 3>, 3> confusion{};
  std::vector<std::string> skipped_ids;
};

/// Turns a record into its frame: PGM paths are read (relative paths are
/// resolved against `base_dir`), simulator states are rendered on `track`.
class FrameResolver {
 public:
  FrameResolver(RenderConfig render, std::optional<TrackSpec> track,
                std::filesystem::path base_dir = {});

  /// Throws std::runtime_error when the frame cannot be produced.
  SemanticFrame load(const EvalRecord& record) const;

  const RenderConfig& render_config() const { return render_; }

 private:
  RenderConfig render_;
  std::optional<TrackSpec> track_;
  std::filesystem::path base_dir_;
};

using Predictor = std::function<Action(const FrameStack&, const EvalRecord&)>;

/// Builds each record's 4-frame window from the three preceding indices of
/// the same sequence when all are present and readable, otherwise replicates
/// the record's own frame. Records whose own frame is unreadable are skipped.
/// Throws std::invalid_argument for an empty manifest.
EvalReport evaluate(const Predictor& predictor, std::span<const EvalRecord> manifest,
                    const FrameResolver& frames);
EvalReport evaluate(const NetworkParams& params, std::span<const EvalRecord> manifest,
                    const FrameResolver& frames);

std::string format_report_table(const EvalReport& report);

/// Header `class,support,correct,accuracy,pred_left,pred_straight,pred_right`,
/// one row per truth class, an `all` row, and a `skipped` row.
std::string report_to_csv(const EvalReport& report);

struct PurePursuitConfig {
  double lookahead = 8.0;        // meters along the centerline
  double wheelbase = 2.7;        // meters, for the equivalent wheel angle
  double steering_ratio = 15.0;  // steering-wheel degrees per wheel degree
  double target_speed = 10.0;
  double yaw_deadband = 0.05;    // rad/s of desired yaw rate below which it drives straight
};

struct ControlOutput {
  double curvature = 0.0;       // 1/m, positive turns left
  double steering_degrees = 0;  // steering-wheel angle, negative is left
  Action action = Action::Straight;
};

/// Pure-pursuit toward the centerline point `lookahead` meters ahead.
ControlOutput pure_pursuit(const TrackSpec& track, const VehicleState& state,
                           const PurePursuitConfig& cfg);

struct GeneratedDataset {
  std::vector<EvalRecord> records;  // frame_source holds the simulator state
  std::vector<SemanticFrame> frames;
};

/// Drives the pure-pursuit controller for `n` steps, restarting with a new
/// sequence id whenever an episode ends, and records every frame with the
/// controller's steering angle. Deterministic per seed.
GeneratedDataset generate_eval_manifest(const TrackSpec& track, std::size_t n, std::uint64_t seed,
                                        const SimConfig& sim, const RenderConfig& render,
                                        const PurePursuitConfig& controller = {});

}  // namespace semdrive
