#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cpgbo/cpg.hpp"

using namespace cpgbo;
constexpr double kPi = std::numbers::pi;

TEST_CASE("trot coupling matrix") {
  const Eigen::Matrix4d phi = trot_coupling();
  Eigen::Matrix4d expected;
  expected << 0, kPi, kPi, 0,
              -kPi, 0, 0, -kPi,
              -kPi, 0, 0, -kPi,
              0, kPi, kPi, 0;
  CHECK(phi == expected);
  CHECK(phi(0, 1) == kPi);
  for (int i = 0; i < 4; ++i) CHECK(phi(i, i) == 0.0);
  CHECK(phi == -phi.transpose());
}

TEST_CASE("amplitude fixed point and Euler step") {
  CpgParams p;
  OscillatorNetworkState s;
  s.r.setConstant(p.mu);
  s.theta << 0.3, 1.9, 4.0, 5.5;
  const auto next = step_network(s, p, Eigen::Vector4d::Zero(), 1e-3);
  CHECK(next.r == s.r);

  // r1 = r0 + dt * alpha * (mu^2 - r0^2) * r0, evaluated by hand for r0 = 0.1.
  OscillatorNetworkState small;
  small.r.setConstant(0.1);
  const auto one = step_network(small, p, Eigen::Vector4d::Zero(), 1e-3);
  const double expected = 0.1 + 1e-3 * 50.0 * (1.3 * 1.3 - 0.01) * 0.1;
  for (int i = 0; i < 4; ++i) CHECK(one.r[i] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("amplitude stays non-negative and zero is absorbing") {
  CpgParams p;
  p.alpha = 50.0;
  OscillatorNetworkState s;
  s.r << 0.0, 3.0, 10.0, 1e-9;
  for (int k = 0; k < 2000; ++k) {
    s = step_network(s, p, Eigen::Vector4d::Zero(), 1e-3);
    CHECK((s.r.array() >= 0.0).all());
  }
  CHECK(s.r[0] == 0.0);
}

TEST_CASE("phase derivative matches a direct evaluation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi), uf(0.0, 80.0), ur(0.1, 2.0);
  CpgParams p;
  p.sigma_n = 0.2;
  p.coupling_weights << 0, 1.0, 0.5, 0.2, 1.0, 0, 0.3, 0.7, 0.5, 0.3, 0, 1.1, 0.2, 0.7, 1.1, 0;
  for (int trial = 0; trial < 50; ++trial) {
    OscillatorNetworkState s;
    Eigen::Vector4d n;
    for (int i = 0; i < 4; ++i) {
      s.theta[i] = u(rng);
      s.r[i] = ur(rng);
      n[i] = uf(rng);
    }
    Eigen::Vector4d rdot, tdot;
    network_derivatives(s, p, n, rdot, tdot);
    for (int i = 0; i < 4; ++i) {
      double expected = std::sin(s.theta[i]) > 0 ? p.omega_swing : p.omega_stance;
      for (int j = 0; j < 4; ++j) {
        expected += s.r[j] * p.coupling_weights(i, j) *
                    std::sin(s.theta[j] - s.theta[i] - p.phase_lags(i, j));
      }
      expected -= p.sigma_n * n[i] * std::cos(s.theta[i]);
      CHECK(tdot[i] == doctest::Approx(expected).epsilon(1e-12));
      CHECK(rdot[i] == doctest::Approx(p.alpha * (p.mu * p.mu - s.r[i] * s.r[i]) * s.r[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("uncoupled oscillator advances by omega dt") {
  CpgParams p;
  p.coupling_weights.setZero();
  p.sigma_n = 0.0;
  OscillatorNetworkState s;
  s.theta.setConstant(1.0);  // sin > 0: swing
  const auto next = step_network(s, p, Eigen::Vector4d::Zero(), 1e-3);
  for (int i = 0; i < 4; ++i) CHECK(next.theta[i] == doctest::Approx(1.0 + p.omega_swing * 1e-3));
  s.theta.setConstant(4.0);  // stance
  const auto st = step_network(s, p, Eigen::Vector4d::Zero(), 1e-3);
  for (int i = 0; i < 4; ++i) CHECK(st.theta[i] == doctest::Approx(4.0 + p.omega_stance * 1e-3));
}

TEST_CASE("loaded stance leg slows down late in stance") {
  CpgParams p;
  p.coupling_weights.setZero();
  OscillatorNetworkState s;
  s.theta.setConstant(1.75 * kPi);  // sin < 0, cos > 0
  Eigen::Vector4d rdot, tdot;
  network_derivatives(s, p, Eigen::Vector4d::Constant(40.0), rdot, tdot);
  for (int i = 0; i < 4; ++i) CHECK(tdot[i] < p.omega_stance);
}

TEST_CASE("sigma_n = 0 ignores forces bitwise") {
  CpgParams p;
  p.sigma_n = 0.0;
  OscillatorNetworkState a = OscillatorNetworkState::trot_start(), b = a;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uf(0.0, 100.0);
  for (int k = 0; k < 3000; ++k) {
    a = step_network(a, p, Eigen::Vector4d::Zero(), 1e-3);
    b = step_network(b, p, Eigen::Vector4d(uf(rng), uf(rng), uf(rng), uf(rng)), 1e-3);
  }
  CHECK(a.r == b.r);
  CHECK(a.theta == b.theta);
}

TEST_CASE("phases stay wrapped") {
  CpgParams p;
  OscillatorNetworkState s;
  s.theta << 0.0, 6.28, 3.0, 1.0;
  for (int k = 0; k < 5000; ++k) {
    s = step_network(s, p, Eigen::Vector4d::Constant(30.0), 1e-3);
    CHECK((s.theta.array() >= 0.0).all());
    CHECK((s.theta.array() < 2 * kPi).all());
  }
  CHECK(wrap_phase(-0.5) == doctest::Approx(2 * kPi - 0.5));
  CHECK(wrap_phase(2 * kPi) == 0.0);
  CHECK(wrap_pi(1.5 * kPi) == doctest::Approx(-0.5 * kPi));
  CHECK(wrap_pi(kPi) == doctest::Approx(kPi));
}

TEST_CASE("step_network rejects bad input") {
  CpgParams p;
  OscillatorNetworkState s;
  CHECK_THROWS_AS(step_network(s, p, Eigen::Vector4d::Zero(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step_network(s, p, Eigen::Vector4d::Zero(), -1e-3), std::invalid_argument);
  CHECK_THROWS_AS(step_network(s, p, Eigen::Vector4d(NAN, 0, 0, 0), 1e-3), std::invalid_argument);
  s.theta[2] = INFINITY;
  CHECK_THROWS_AS(step_network(s, p, Eigen::Vector4d::Zero(), 1e-3), std::invalid_argument);
}

TEST_CASE("deterministic") {
  CpgParams p;
  OscillatorNetworkState a = OscillatorNetworkState::trot_start(), b = a;
  const Eigen::Vector4d n(10, 20, 30, 40);
  a = step_network(a, p, n, 1e-3);
  b = step_network(b, p, n, 1e-3);
  CHECK(a.theta == b.theta);
  CHECK(a.r == b.r);
}

TEST_CASE("foot trajectory") {
  CpgParams p;
  p.body_height = 0.3;
  p.ground_clearance = 0.08;
  p.x_offset_front = -0.02;
  p.x_offset_hind = -0.05;
  const FootTarget top = foot_target(1.0, kPi / 2, 0, p);
  CHECK(top.z == doctest::Approx(-0.22));
  CHECK(top.x == doctest::Approx(-0.02));
  CHECK(foot_target(1.0, kPi / 2, 3, p).x == doctest::Approx(-0.05));
  const FootTarget bottom = foot_target(1.0, 1.5 * kPi, 1, p);
  CHECK(bottom.z == doctest::Approx(-0.3 - p.ground_penetration));
  CHECK(foot_target(1.2, 0.0, 2, p).x == doctest::Approx(-0.05 - p.step_length * 1.2));
  CHECK(foot_target(1.0, 0.0, 0, p).z == -0.3);
  CHECK(foot_target(1.0, 1e-12, 0, p).z == doctest::Approx(-0.3).epsilon(1e-10));
  CHECK(foot_target(1.0, 2 * kPi - 1e-12, 0, p).z == doctest::Approx(-0.3).epsilon(1e-10));

  OscillatorNetworkState s;
  s.r << 1.0, 0.5, 1.3, 0.9;
  s.theta << 0.1, 2.0, 3.5, 5.0;
  const auto all = foot_targets(s, p);
  for (int i = 0; i < 4; ++i) {
    CHECK(all[i].leg_index == i);
    const auto single = foot_target(s.r[i], s.theta[i], i, p);
    CHECK(all[i].x == single.x);
    CHECK(all[i].z == single.z);
  }
}

TEST_CASE("foot height is bounded by clearance and penetration") {
  CpgParams p;
  for (double th = 0.0; th < 2 * kPi; th += 0.01) {
    const FootTarget t = foot_target(p.mu, th, 0, p);
    CHECK(t.z <= -p.body_height + p.ground_clearance + 1e-15);
    CHECK(t.z >= -p.body_height - p.ground_penetration - 1e-15);
  }
}

TEST_CASE("optimized field order round-trips") {
  CpgParams p;
  const std::array<double, 8> v = {0.07, 0.012, 18.0, 11.0, 1.1, -0.02, -0.04, 0.25};
  p.set_optimized(v);
  CHECK(p.optimized() == v);
  CHECK(p.ground_clearance == 0.07);
  CHECK(p.sigma_n == 0.25);
  CHECK(p.x_offset_hind == -0.04);
}

TEST_CASE("fixed constants are validated") {
  CpgParams p;
  CHECK_NOTHROW(p.validate());
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = CpgParams{};
  p.body_height = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
