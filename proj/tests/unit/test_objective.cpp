#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cpgbo/objective.hpp"

using namespace cpgbo;

namespace {

TrialRecord constant_record(double vx, double power, double distance, double mass, int steps = 3000) {
  TrialRecord r;
  Vector8d tau = Vector8d::Zero(), qdot = Vector8d::Zero();
  tau[0] = power;
  qdot[0] = 1.0;
  for (int k = 0; k < steps; ++k) {
    r.push_sample({vx, 0.0}, tau, qdot, Eigen::Vector4d::Constant(30.0), 0.0);
  }
  r.distance = distance;
  r.total_mass = mass;
  return r;
}

}  // namespace

TEST_CASE("defaults") {
  ObjectiveConfig c;
  CHECK(c.w1 == 1.0);
  CHECK(c.w2 == 0.5);
  CHECK(c.steps == 3000);
  CHECK(c.reward_cap == 0.85);
  CHECK(c.velocity_bandwidth == 0.05);
  CHECK(c.max_velocity_term() == doctest::Approx(2.55));
}

TEST_CASE("joint power uses absolute values") {
  Vector8d tau, qdot;
  tau << 1, -2, 3, -4, 0, 0, 1, 1;
  qdot << -1, -1, 2, 2, 5, 0, -3, 0;
  CHECK(joint_power(tau, qdot) == 1 + 2 + 6 + 8 + 0 + 0 + 3 + 0);
}

TEST_CASE("cost of transport") {
  const TrialRecord r = constant_record(0.5, 30.0, 1.5, 12.0);
  // 30 W for 3 s over m g d.
  CHECK(cost_of_transport(r) == doctest::Approx(90.0 / (12.0 * 9.81 * 1.5)).epsilon(1e-12));
  CHECK(cost_of_transport(r) == doctest::Approx(0.5097).epsilon(1e-4));
  CHECK(cost_of_transport(constant_record(0.5, 0.0, 1.5, 12.0)) == 0.0);
  CHECK(cost_of_transport(constant_record(0.5, 60.0, 1.5, 12.0)) ==
        doctest::Approx(2 * cost_of_transport(r)));
  CHECK(cost_of_transport(constant_record(0.0, 30.0, 0.005, 12.0)) == 10.0);
}

TEST_CASE("objective value") {
  ObjectiveConfig cfg;
  // Perfect tracking saturates the reward at l_r every step.
  TrialRecord perfect = constant_record(0.5, 30.0, 1.5, 12.0);
  const double cot = cost_of_transport(perfect);
  CHECK(objective_value(perfect, 0.5) == doctest::Approx(2.55 - 0.5 * cot).epsilon(1e-12));

  // A stationary robot far from v* = 0.5.
  TrialRecord still = constant_record(0.0, 0.0, 1.0, 12.0);
  const double term = 3000 * 0.001 * std::exp(-0.25 / 0.05);
  CHECK(objective_value(still, 0.5) == doctest::Approx(term).epsilon(1e-12));
  CHECK(term == doctest::Approx(0.0202).epsilon(1e-2));

  TrialRecord aborted = perfect;
  aborted.aborted = true;
  CHECK(objective_value(aborted, 0.5) == -1.0);

  // The reference flat-terrain pair (CoT 0.510, J 2.175) respects the saturation bound.
  CHECK(2.175 <= cfg.max_velocity_term() - cfg.w2 * 0.510);
}

TEST_CASE("reward is capped and J falls with CoT") {
  ObjectiveConfig cfg;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.5, 0.3);
  TrialRecord r;
  for (int k = 0; k < 3000; ++k) {
    const double vx = n(rng), vy = 0.2 * n(rng);
    CHECK(velocity_reward(vx, vy, 0.5, cfg) <= 0.85);
    r.push_sample({vx, vy}, Vector8d::Constant(1.0), Vector8d::Constant(0.5), Eigen::Vector4d::Zero(), 0.0);
  }
  r.distance = 1.0;
  r.total_mass = 12.0;
  double prev = objective_value(r, 0.5);
  CHECK(prev <= cfg.max_velocity_term() - cfg.w2 * cost_of_transport(r));
  for (double d : {0.9, 0.7, 0.4, 0.2}) {
    r.distance = d;  // larger CoT, same velocity trace
    const double j = objective_value(r, 0.5);
    CHECK(j <= prev);
    prev = j;
  }
}

TEST_CASE("context estimate") {
  TrialRecord r;
  for (int k = 0; k < 100; ++k) {
    r.push_sample({0, 0}, Vector8d::Zero(), Vector8d::Zero(), Eigen::Vector4d::Constant(30.0), -0.17);
  }
  CHECK(estimate_context(r).load == 30.0);
  CHECK(estimate_context(r).slope == doctest::Approx(-0.17));

  TrialRecord half;
  for (int k = 0; k < 100; ++k) {
    half.push_sample({0, 0}, Vector8d::Zero(), Vector8d::Zero(), Eigen::Vector4d(40, 0, 40, 0), 0.0);
  }
  CHECK(estimate_context(half).load == 20.0);

  // Permutation invariance and linearity.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  TrialRecord a, b, scaled;
  std::vector<std::pair<Eigen::Vector4d, double>> samples;
  for (int k = 0; k < 64; ++k) samples.push_back({Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)), u(rng) / 100});
  for (const auto& [f, p] : samples) {
    a.push_sample({0, 0}, Vector8d::Zero(), Vector8d::Zero(), f, p);
    scaled.push_sample({0, 0}, Vector8d::Zero(), Vector8d::Zero(), 2 * f, 2 * p);
  }
  std::reverse(samples.begin(), samples.end());
  for (const auto& [f, p] : samples) b.push_sample({0, 0}, Vector8d::Zero(), Vector8d::Zero(), f, p);
  CHECK(estimate_context(a).load == doctest::Approx(estimate_context(b).load).epsilon(1e-14));
  CHECK(estimate_context(a).slope == doctest::Approx(estimate_context(b).slope).epsilon(1e-14));
  CHECK(estimate_context(scaled).load == doctest::Approx(2 * estimate_context(a).load).epsilon(1e-14));
}

TEST_CASE("normalization") {
  NormalizationRanges ranges;
  CpgParams lo;
  std::array<double, 8> lows{};
  for (std::size_t d = 0; d < 8; ++d) lows[d] = ranges.params[d].lo;
  lo.set_optimized(lows);
  for (double u : normalize(lo, ranges)) CHECK(u == 0.0);
  CHECK(normalize(ContextVector{35.0, 0.0}, ranges)[0] == 0.5);
  CHECK(normalize(ContextVector{100.0, -1.0}, ranges)[0] == 1.0);
  CHECK(normalize(ContextVector{100.0, -1.0}, ranges)[1] == 0.0);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    std::array<double, 8> unit{};
    for (double& x : unit) x = u(rng);
    const CpgParams p = denormalize(unit, ranges);
    const auto back = normalize(p, ranges);
    for (std::size_t d = 0; d < 8; ++d) CHECK(back[d] == doctest::Approx(unit[d]).epsilon(1e-12));
    const ContextVector c{denormalize(unit[0], ranges.load), denormalize(unit[1], ranges.slope)};
    const auto cu = normalize(c, ranges);
    CHECK(cu[0] == doctest::Approx(unit[0]).epsilon(1e-12));
    CHECK(cu[1] == doctest::Approx(unit[1]).epsilon(1e-12));
  }
}
