#include "cpgbo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpgbo {

int TrialProtocol::transition_steps() const {
  return static_cast<int>(std::llround(transition_duration * control_rate));
}

int TrialProtocol::steady_steps() const {
  return static_cast<int>(std::llround(steady_duration * control_rate));
}

void TrialProtocol::validate() const {
  if (!(transition_duration >= 0.0) || !(steady_duration > 0.0) || !(control_rate > 0.0)) {
    throw std::invalid_argument("TrialProtocol: durations and rate must be positive");
  }
  if (steady_steps() < 1) throw std::invalid_argument("TrialProtocol: empty steady-state window");
}

CpgParams interpolate_params(const CpgParams& from, const CpgParams& to, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolate_params: t must be in [0, 1]");
  const auto a = from.optimized();
  const auto b = to.optimized();
  std::array<double, CpgParams::kNumOptimized> v{};
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = t == 1.0 ? b[d] : a[d] + t * (b[d] - a[d]);
  CpgParams out = to;
  out.set_optimized(v);
  return out;
}

void TrialRecorder::begin_steady(const SimState& state) {
  steady_start_ = state.position;
  record_ = TrialRecord{};
}

void TrialRecorder::add(TrialPhase phase, const SimState& state, const Vector8d& applied_torque) {
  if (phase == TrialPhase::kTransition) {
    ++transition_samples_;
    return;
  }
  record_.push_sample(heading_velocity(state), applied_torque, state.joints.qdot,
                      state.normal_forces, trunk_attitude(state).pitch);
}

TrialRecord TrialRecorder::finish(const SimState& end_state, const CpgParams& params,
                                  double total_mass, double v_star, const Terrain& terrain,
                                  const ObjectiveConfig& cfg) && {
  TrialRecord r = std::move(record_);
  r.params = params;
  r.total_mass = total_mass;
  r.v_star = v_star;
  r.distance = planar_distance(steady_start_, end_state.position, terrain);
  r.context = estimate_context(r);
  r.cost_of_transport = cost_of_transport(r, cfg);
  r.objective = objective_value(r, v_star, cfg);
  return r;
}

double planar_distance(const Eigen::Vector3d& from, const Eigen::Vector3d& to,
                       const Terrain& terrain) {
  const Eigen::Vector3d d = to - from;
  const Eigen::Vector3d n = terrain.normal();
  return (d - n.dot(d) * n).norm();
}

namespace {

void reset_to_standing(SimWorld& world, LocomotionController& controller, double body_height) {
  const Eigen::Vector3d p = world.state.position;
  const double t = world.state.time;
  world.state = standing_state(world.model, world.terrain, body_height, p.x(), p.y());
  world.state.time = t;
  controller.reset(world.state);
}

bool fallen(const SimState& state, const Terrain& terrain) {
  return trunk_height(state, terrain) < kFallHeight;
}

}  // namespace

TrialRecord run_trial(const CpgParams& params, const CpgParams& prev_params, SimWorld& world,
                      LocomotionController& controller, const TrialProtocol& protocol,
                      double v_star, const ObjectiveConfig& cfg) {
  const double dt = protocol.dt();
  const int nt = protocol.transition_steps();
  const int ns = protocol.steady_steps();
  const double limit = world.model.torque_limit;
  controller.set_model(world.model);

  TrialRecorder recorder;
  bool aborted = false;
  auto tick = [&](const CpgParams& p, TrialPhase phase) {
    const Vector8d tau = controller.tick(world.state, p).cwiseMax(-limit).cwiseMin(limit);
    world.state = step(world.state, tau, world.model, world.terrain, dt, world.step_options);
    if (fallen(world.state, world.terrain)) return false;
    recorder.add(phase, world.state, tau);
    return true;
  };

  try {
    for (int k = 0; k < nt && !aborted; ++k) {
      const double t = static_cast<double>(k + 1) / nt;
      aborted = !tick(interpolate_params(prev_params, params, t), TrialPhase::kTransition);
    }
    if (!aborted) recorder.begin_steady(world.state);
    for (int k = 0; k < ns && !aborted; ++k) aborted = !tick(params, TrialPhase::kSteady);
  } catch (const SimulationDiverged&) {
    aborted = true;
  } catch (const WorkspaceError&) {
    aborted = true;
  }

  if (aborted) {
    TrialRecord r;
    r.aborted = true;
    r.params = params;
    r.total_mass = world.model.total_mass();
    r.v_star = v_star;
    r.objective = cfg.abort_objective;
    r.cost_of_transport = cfg.cot_cap;
    r.context = nominal_context(world.model);
    if (!world.state.position.allFinite()) world.state = SimState{};
    reset_to_standing(world, controller, params.body_height);
    return r;
  }
  return std::move(recorder).finish(world.state, params, world.model.total_mass(), v_star,
                                    world.terrain, cfg);
}

namespace {

template <typename Event>
void check_sorted(const std::vector<Event>& events, int budget, const char* name) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].trial < 0 || events[i].trial >= budget) {
      throw std::invalid_argument(std::string(name) + " schedule: trial index out of range");
    }
    if (i > 0 && events[i].trial <= events[i - 1].trial) {
      throw std::invalid_argument(std::string(name) +
                                  " schedule: trial indices must be strictly increasing");
    }
  }
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void ScenarioConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (random_trials < 0) throw std::invalid_argument("random_trials must be >= 0");
  if (change_window < 1) throw std::invalid_argument("change_window must be >= 1");
  robot.validate();
  terrain.validate();
  initial_params.validate();
  protocol.validate();
  objective.validate();
  beta.validate();
  sharing.validate();
  ranges.validate();
  if (protocol.steady_steps() != objective.steps) {
    throw std::invalid_argument("protocol steady-state samples must equal objective T");
  }
  if (std::abs(protocol.dt() - objective.dt) > 1e-15 || std::abs(control.dt - objective.dt) > 1e-15) {
    throw std::invalid_argument("control rate must match objective dt");
  }
  if (acquisition.candidates < 1 || acquisition.refine_starts < 0 || acquisition.refine_steps < 0) {
    throw std::invalid_argument("acquisition sizes must be non-negative");
  }
  check_sorted(velocity_schedule, budget, "velocity");
  check_sorted(terrain_schedule, budget, "terrain");
  check_sorted(payload_schedule, budget, "payload");
  if (velocity_schedule.empty() || velocity_schedule.front().trial != 0) {
    throw std::invalid_argument("velocity schedule must start at trial 0");
  }
  for (const auto& e : velocity_schedule) {
    if (!std::isfinite(e.v_star)) throw std::invalid_argument("velocity schedule: non-finite v*");
  }
  for (const auto& e : terrain_schedule) {
    Terrain t = terrain;
    t.friction_coefficient = e.friction;
    t.slope_angle = deg_to_rad(e.slope_deg);
    t.validate();
  }
  for (const auto& e : payload_schedule) {
    if (!(e.mass >= 0.0)) throw std::invalid_argument("payload schedule: mass must be >= 0");
  }
}

double ScenarioConfig::initial_v_star() const {
  return velocity_schedule.empty() ? 0.5 : velocity_schedule.front().v_star;
}

Summary RunReport::summary(int last) const {
  Summary s;
  for (auto it = rows.rbegin(); it != rows.rend() && s.count < last; ++it) {
    if (it->aborted) continue;
    s.mean_vx += it->mean_vx;
    s.cost_of_transport += it->cost_of_transport;
    s.objective += it->objective;
    ++s.count;
  }
  if (s.count > 0) {
    s.mean_vx /= s.count;
    s.cost_of_transport /= s.count;
    s.objective /= s.count;
  }
  return s;
}

SearchSpace search_space_for(ControllerVariant variant) {
  SearchSpace s = SearchSpace::all_active(CpgParams::kNumOptimized);
  if (!uses_tegotae(variant)) s.active[7] = false;
  return s;
}

std::optional<CpgParams> best_params(const std::vector<TrialRecord>& trials, std::size_t begin,
                                     std::size_t end) {
  std::optional<CpgParams> best;
  double best_j = 0.0;
  for (std::size_t i = begin; i < std::min(end, trials.size()); ++i) {
    const TrialRecord& t = trials[i];
    if (t.aborted) continue;
    if (!best || t.objective > best_j) {
      best = t.params;
      best_j = t.objective;
    }
  }
  return best;
}

ContextVector nominal_context(const RobotModel& model) {
  return {model.total_mass() * model.gravity / 4.0, 0.0};
}

ScenarioResult run_scenario(const ScenarioConfig& config, const TrialCallback& on_trial) {
  config.validate();

  ScenarioResult result;
  result.report.name = config.name;
  result.report.variant = config.variant;
  result.report.seed = config.seed;

  SimWorld& world = result.world;
  world.model = config.robot;
  world.terrain = config.terrain;
  world.step_options = config.step_options;
  std::size_t next_velocity = 0, next_terrain = 0, next_payload = 0;

  // Events scheduled at trial i take effect before trial i is proposed.
  auto apply_world_events = [&](int trial, bool started, LocomotionController* controller) {
    bool slope_changed = false;
    while (next_terrain < config.terrain_schedule.size() &&
           config.terrain_schedule[next_terrain].trial == trial) {
      const TerrainEvent& e = config.terrain_schedule[next_terrain++];
      const double slope = deg_to_rad(e.slope_deg);
      world.terrain.friction_coefficient = e.friction;
      if (slope != world.terrain.slope_angle) {
        if (started) {
          const Eigen::Vector3d p = world.state.position;
          world.terrain.anchor = p - world.terrain.height_above(p) * world.terrain.normal();
        }
        world.terrain.slope_angle = slope;
        slope_changed = true;
      }
    }
    while (next_payload < config.payload_schedule.size() &&
           config.payload_schedule[next_payload].trial == trial) {
      world.model = configure(world.model, config.payload_schedule[next_payload++].mass);
    }
    if (controller != nullptr) controller->set_model(world.model);
    if (started && slope_changed) reset_to_standing(world, *controller, config.initial_params.body_height);
  };

  apply_world_events(0, false, nullptr);
  world.state = standing_state(world.model, world.terrain, config.initial_params.body_height);
  LocomotionController controller(config.variant, world.model, config.control);
  controller.reset(world.state);

  Rng rng(config.seed);
  BetaController betas(config.beta, config.sharing, config.change_window);
  ProposalOptions options;
  options.random_trials = config.random_trials;
  options.acquisition = config.acquisition;
  options.fit = config.fit;
  options.space = search_space_for(config.variant);

  OptimizerHistory& history = result.history;
  history.seed = config.seed;
  history.v_star = config.initial_v_star();
  double v_star = history.v_star;
  CpgParams prev = config.initial_params;

  for (int i = 0; i < config.budget; ++i) {
    if (i > 0) apply_world_events(i, true, &controller);
    while (next_velocity < config.velocity_schedule.size() &&
           config.velocity_schedule[next_velocity].trial == i) {
      const double v = config.velocity_schedule[next_velocity++].v_star;
      if (v != v_star) {
        v_star = v;
        history = reuse_history(std::move(history), v_star, config.objective);
      }
    }

    const auto contexts = history.contexts();
    double beta = betas.next_beta(contexts);
    if (config.inference_mode) beta = kInferenceBeta;
    const ContextVector context =
        history.trials.empty() ? nominal_context(world.model) : history.trials.back().context;

    ProposalInfo info;
    const CpgParams params = propose_next(history, context, beta, config.ranges, rng, options,
                                          config.initial_params, &info);
    if (info.kernel) options.initial_kernel = info.kernel;

    TrialRecord record =
        run_trial(params, prev, world, controller, config.protocol, v_star, config.objective);
    // A failed trial says nothing about the context; carry the last estimate.
    if (record.aborted && !history.trials.empty()) record.context = history.trials.back().context;

    ReportRow row;
    row.trial = i;
    row.params = params;
    row.context = record.context;
    row.mean_vx = record.mean_velocity_x();
    row.cost_of_transport = record.cost_of_transport;
    row.objective = record.objective;
    row.beta = beta;
    row.aborted = record.aborted;
    row.v_star = v_star;
    row.payload = world.model.payload_mass;
    row.friction = world.terrain.friction_coefficient;
    row.slope_deg = world.terrain.slope_angle * 180.0 / std::numbers::pi;
    row.random = info.random;
    row.context_changed = betas.context_changed();
    row.same_context = betas.last_count();

    history.trials.push_back(std::move(record));
    result.report.rows.push_back(row);
    if (on_trial) on_trial(row);
    prev = params;
  }
  result.controller = controller;
  result.last_params = prev;
  return result;
}

}  // namespace cpgbo
