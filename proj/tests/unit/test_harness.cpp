#include <doctest.h>

#include <random>

#include "cpgbo/harness.hpp"

using namespace cpgbo;

namespace {

SimWorld standing_world() {
  SimWorld w;
  w.state = standing_state(w.model, w.terrain, 0.3);
  return w;
}

ScenarioConfig tiny(int budget) {
  ScenarioConfig c;
  c.budget = budget;
  c.fit.restarts = 1;
  c.fit.iterations = 10;
  c.acquisition.candidates = 128;
  c.acquisition.refine_steps = 16;
  return c;
}

}  // namespace

TEST_CASE("parameter interpolation") {
  CpgParams a, b;
  a.omega_swing = 16.0;
  b.omega_swing = 20.0;
  b.body_height = 0.28;
  const CpgParams mid = interpolate_params(a, b, 0.5);
  CHECK(mid.omega_swing == 18.0);
  CHECK(mid.body_height == 0.28);
  CHECK(interpolate_params(a, b, 0.0).optimized() == a.optimized());
  CHECK(interpolate_params(a, b, 1.0).optimized() == b.optimized());
  CHECK_THROWS_AS(interpolate_params(a, b, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(interpolate_params(a, b, -0.1), std::invalid_argument);
}

TEST_CASE("protocol") {
  TrialProtocol p;
  CHECK(p.transition_steps() == 1500);
  CHECK(p.steady_steps() == 3000);
  CHECK(p.dt() == 1e-3);
}

TEST_CASE("transition samples never reach the record") {
  const SimWorld w = standing_world();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  auto record = [&](bool garbage) {
    TrialRecorder rec;
    for (int k = 0; k < 50; ++k) {
      SimState s = w.state;
      if (garbage) {
        s.linear_velocity = Eigen::Vector3d(u(rng), u(rng), u(rng));
        s.normal_forces = Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)).cwiseAbs();
        s.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(u(rng), Eigen::Vector3d::UnitY()));
      }
      rec.add(TrialPhase::kTransition, s, Vector8d::Constant(garbage ? u(rng) : 0.0));
    }
    rec.begin_steady(w.state);
    SimState s = w.state;
    for (int k = 0; k < 3000; ++k) {
      s.position.x() += 5e-4;
      s.linear_velocity.x() = 0.5;
      s.normal_forces = Eigen::Vector4d(30, 31, 29, 30);
      rec.add(TrialPhase::kSteady, s, Vector8d::Constant(3.0));
    }
    CHECK(rec.transition_samples() == 50);
    return std::move(rec).finish(s, CpgParams{}, 12.0, 0.5, w.terrain, ObjectiveConfig{});
  };
  const TrialRecord clean = record(false), dirty = record(true);
  CHECK(clean.samples() == 3000);
  CHECK(clean.objective == dirty.objective);
  CHECK(clean.context.load == dirty.context.load);
  CHECK(clean.context.slope == dirty.context.slope);
  CHECK(clean.distance == doctest::Approx(1.5));
}

TEST_CASE("planar distance follows the terrain") {
  Terrain t;
  t.slope_angle = 0.3;
  const Eigen::Vector3d along(std::cos(0.3), 0.0, std::sin(0.3));
  CHECK(planar_distance({0, 0, 0}, 2.0 * along, t) == doctest::Approx(2.0));
  CHECK(planar_distance({0, 0, 0}, 0.1 * t.normal(), t) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a trial records 3000 steady samples and is deterministic") {
  auto run = [](ControllerVariant v) {
    SimWorld w = standing_world();
    LocomotionController ctl(v, w.model);
    ctl.reset(w.state);
    CpgParams p;
    return std::pair{run_trial(p, p, w, ctl, TrialProtocol{}, 0.5), ctl.last_vmc_torque()};
  };
  const auto [a, tau_a] = run(ControllerVariant::kVmcTegotae);
  const auto [b, tau_b] = run(ControllerVariant::kVmcTegotae);
  CHECK(!a.aborted);
  CHECK(a.samples() == 3000);
  CHECK(a.objective == b.objective);
  CHECK(a.velocity_x == b.velocity_x);
  CHECK(a.joint_power == b.joint_power);
  CHECK(a.objective == objective_value(a, 0.5));
  CHECK(a.v_star == 0.5);

  const auto [open, tau_open] = run(ControllerVariant::kOpenLoop);
  CHECK(tau_open.isZero(0.0));
  CHECK(open.objective <= 2.55 - 0.5 * open.cost_of_transport);
}

TEST_CASE("summary averages the last five non-aborted rows") {
  RunReport r;
  for (int i = 0; i < 9; ++i) {
    ReportRow row;
    row.trial = i;
    row.objective = i;
    row.mean_vx = 0.1 * i;
    row.cost_of_transport = 1.0;
    row.aborted = i == 7;
    r.rows.push_back(row);
  }
  const Summary s = r.summary();
  CHECK(s.count == 5);
  CHECK(s.objective == doctest::Approx((8 + 6 + 5 + 4 + 3) / 5.0));
  CHECK(RunReport{}.summary().count == 0);
}

TEST_CASE("scenario validation") {
  ScenarioConfig c;
  CHECK_NOTHROW(c.validate());
  c.budget = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.velocity_schedule = {{0, 0.5}, {10, 0.3}, {5, 0.6}};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.velocity_schedule = {{3, 0.5}};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.payload_schedule = {{50, 7.5}};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.payload_schedule = {{5, -1.0}};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.protocol.steady_duration = 2.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("scenario rows, events and inference mode") {
  ScenarioConfig c = tiny(6);
  c.inference_mode = true;
  c.velocity_schedule = {{0, 0.5}, {4, 0.3}};
  c.payload_schedule = {{2, 7.5}};
  c.terrain_schedule = {{3, 0.6, 0.0}};
  int calls = 0;
  const ScenarioResult res = run_scenario(c, [&](const ReportRow&) { ++calls; });
  REQUIRE(res.report.rows.size() == 6);
  CHECK(calls == 6);
  for (const auto& row : res.report.rows) CHECK(row.beta == kInferenceBeta);
  CHECK(res.report.rows[0].random);
  CHECK(!res.report.rows[3].random);
  CHECK(res.report.rows[1].payload == 0.0);
  CHECK(res.report.rows[2].payload == 7.5);
  CHECK(res.report.rows[3].friction == 0.6);
  CHECK(res.report.rows[3].v_star == 0.5);
  CHECK(res.report.rows[4].v_star == 0.3);
  CHECK(res.history.v_star == 0.3);
  CHECK(res.history.trials[2].total_mass == 19.5);
  for (const auto& t : res.history.trials) CHECK(t.objective == objective_value(t, 0.3));

  const ScenarioResult again = run_scenario(c);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(again.report.rows[i].objective == res.report.rows[i].objective);
    CHECK(again.report.rows[i].params.optimized() == res.report.rows[i].params.optimized());
  }
}

TEST_CASE("search space per variant") {
  CHECK(search_space_for(ControllerVariant::kVmcTegotae).active[7]);
  CHECK(!search_space_for(ControllerVariant::kVmc).active[7]);
  CHECK(!search_space_for(ControllerVariant::kOpenLoop).active[7]);
  CHECK(parse_variant("vmc+tegotae") == ControllerVariant::kVmcTegotae);
  CHECK_THROWS_AS(parse_variant("cpg"), std::invalid_argument);
}
