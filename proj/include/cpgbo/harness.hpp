#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cpgbo/cbo.hpp"
#include "cpgbo/controller.hpp"
#include "cpgbo/objective.hpp"
#include "cpgbo/sim.hpp"

namespace cpgbo {

struct TrialProtocol {
  double transition_duration = 1.5;  // [s]
  double steady_duration = 3.0;      // [s]
  double control_rate = 1000.0;      // [Hz]

  double dt() const { return 1.0 / control_rate; }
  int transition_steps() const;
  int steady_steps() const;
  void validate() const;
};

/// Per-field linear blend of the optimized fields; fixed fields come from `to`.
CpgParams interpolate_params(const CpgParams& from, const CpgParams& to, double t);

/// Everything the simulator needs, owned by one scenario.
struct SimWorld {
  RobotModel model;
  Terrain terrain;
  SimState state;
  StepOptions step_options;
};

enum class TrialPhase { kTransition, kSteady };

/// Collects per-tick samples. Only steady-state samples enter the record;
/// transition samples are counted and dropped.
class TrialRecorder {
 public:
  void begin_steady(const SimState& state);
  void add(TrialPhase phase, const SimState& state, const Vector8d& applied_torque);
  /// Fills distance, mass, context, CoT and objective.
  TrialRecord finish(const SimState& end_state, const CpgParams& params, double total_mass,
                     double v_star, const Terrain& terrain, const ObjectiveConfig& cfg) &&;

  int transition_samples() const { return transition_samples_; }
  const TrialRecord& record() const { return record_; }

 private:
  TrialRecord record_;
  Eigen::Vector3d steady_start_ = Eigen::Vector3d::Zero();
  int transition_samples_ = 0;
};

/// Distance covered between two trunk positions, projected onto the terrain plane.
double planar_distance(const Eigen::Vector3d& from, const Eigen::Vector3d& to,
                       const Terrain& terrain);

/// Trunk height below which a trial counts as a fall [m].
inline constexpr double kFallHeight = 0.05;

/// Runs one trial on the chained world: transition with interpolated
/// parameters, then the steady-state window that is recorded. On divergence
/// or a fall the record is flagged aborted with the floor objective and the
/// world is reset to a standing pose.
TrialRecord run_trial(const CpgParams& params, const CpgParams& prev_params, SimWorld& world,
                      LocomotionController& controller, const TrialProtocol& protocol,
                      double v_star, const ObjectiveConfig& cfg = {});

struct VelocityEvent {
  int trial = 0;
  double v_star = 0.5;
};
struct TerrainEvent {
  int trial = 0;
  double friction = 0.9;
  double slope_deg = 0.0;
};
struct PayloadEvent {
  int trial = 0;
  double mass = 0.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ControllerVariant variant = ControllerVariant::kVmcTegotae;
  int budget = 40;
  std::uint64_t seed = 1;
  bool inference_mode = false;

  RobotModel robot;
  Terrain terrain;
  StepOptions step_options;
  ControllerConfig control;
  CpgParams initial_params;  // also carries the fixed oscillator constants
  TrialProtocol protocol;
  ObjectiveConfig objective;
  BetaSchedule beta;
  ContextSharingConfig sharing;
  NormalizationRanges ranges;
  AcquisitionOptions acquisition;
  gp::FitOptions fit;
  int random_trials = 3;
  int change_window = 5;

  std::vector<VelocityEvent> velocity_schedule{{0, 0.5}};
  std::vector<TerrainEvent> terrain_schedule;
  std::vector<PayloadEvent> payload_schedule;

  /// Throws std::invalid_argument describing the first violation.
  void validate() const;
  double initial_v_star() const;
};

struct ReportRow {
  int trial = 0;
  CpgParams params;
  ContextVector context;
  double mean_vx = 0.0;
  double cost_of_transport = 0.0;
  double objective = 0.0;
  double beta = 0.0;
  bool aborted = false;
  double v_star = 0.0;
  double payload = 0.0;
  double friction = 0.0;
  double slope_deg = 0.0;
  bool random = false;
  bool context_changed = false;
  int same_context = 0;
};

struct Summary {
  int count = 0;  // rows averaged (at most 5)
  double mean_vx = 0.0;
  double cost_of_transport = 0.0;
  double objective = 0.0;
};

struct RunReport {
  std::string name;
  ControllerVariant variant = ControllerVariant::kVmcTegotae;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;

  /// Mean over the last `last` non-aborted rows.
  Summary summary(int last = 5) const;
};

struct ScenarioResult {
  RunReport report;           // objectives as computed online
  OptimizerHistory history;   // traces; objectives recalibrated to the latest v*
  // End of the session, for continuing it with further trials.
  SimWorld world;
  std::optional<LocomotionController> controller;
  CpgParams last_params;
};

using TrialCallback = std::function<void(const ReportRow&)>;

/// Runs the online optimization loop for config.budget trials.
ScenarioResult run_scenario(const ScenarioConfig& config, const TrialCallback& on_trial = {});

/// Search box for a variant: sigma_n is pinned when force feedback is off.
SearchSpace search_space_for(ControllerVariant variant);

/// Parameters with the best recorded objective among non-aborted trials in
/// [begin, end).
std::optional<CpgParams> best_params(const std::vector<TrialRecord>& trials, std::size_t begin,
                                     std::size_t end);

/// Nominal context used before any trial has been recorded.
ContextVector nominal_context(const RobotModel& model);

}  // namespace cpgbo
