#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cpgbo/sim.hpp"

using namespace cpgbo;

namespace {

// Joint PD holding the joints at their current angles.
Vector8d hold(const SimState& s, const Vector8d& q_ref) {
  JointGains g;
  return pd_torque(s.joints, q_ref, Vector8d::Zero(), g);
}

}  // namespace

TEST_CASE("contact force") {
  Terrain t;
  const ContactForce above = contact_force({0, 0, 0.01}, {0, 0, -1}, t);
  CHECK(above.normal == 0.0);
  CHECK(above.tangential.isZero(0.0));
  const ContactForce pressed = contact_force({0, 0, -0.003}, Eigen::Vector3d::Zero(), t);
  CHECK(pressed.normal == doctest::Approx(1e4 * 0.003));
  CHECK(pressed.tangential.isZero(0.0));
  // Separating fast: the damper would pull, the normal force stays at zero.
  CHECK(contact_force({0, 0, -0.001}, {0, 0, 5.0}, t).normal == 0.0);

  for (double vx : {0.001, 0.01, 0.5, 3.0}) {
    for (double mu : {0.0, 0.3, 0.9}) {
      t.friction_coefficient = mu;
      const ContactForce c = contact_force({0, 0, -0.004}, {vx, -0.3 * vx, -0.01}, t);
      CHECK(c.normal >= 0.0);
      CHECK(c.tangential.norm() <= mu * c.normal * (1 + 1e-12) + 1e-12);
      CHECK(c.tangential.x() <= 0.0);
    }
  }
}

TEST_CASE("terrain plane") {
  Terrain t;
  t.slope_angle = 10.0 * std::numbers::pi / 180.0;
  const Eigen::Vector3d n = t.normal();
  CHECK(n.norm() == doctest::Approx(1.0));
  // Rises towards +x: a point at x > 0 on z = 0 lies below the plane.
  CHECK(t.height_above({1.0, 0.0, 0.0}) < 0.0);
  const double m = 12.0, g = 9.81;
  const Eigen::Vector3d weight(0, 0, -m * g);
  const Eigen::Vector3d along = weight - weight.dot(n) * n;
  CHECK(along.norm() == doctest::Approx(m * g * std::sin(t.slope_angle)));
  t.anchor = Eigen::Vector3d(2.0, 1.0, 0.5);
  CHECK(t.height_above(t.anchor) == 0.0);
  CHECK(t.height_above(t.anchor + 0.1 * n) == doctest::Approx(0.1));
}

TEST_CASE("payload") {
  RobotModel m;
  const RobotModel loaded = configure(m, 15.0);
  CHECK(loaded.total_mass() == 27.0);
  CHECK((loaded.total_inertia().array() > m.total_inertia().array()).all());
  const RobotModel same = configure(m, 0.0);
  CHECK(same.total_mass() == m.total_mass());
  CHECK(same.total_inertia() == m.total_inertia());
  CHECK_THROWS_AS(configure(m, -1.0), std::invalid_argument);
}

TEST_CASE("ballistic flight and energy conservation") {
  RobotModel m;
  Terrain t;
  SimState s;
  s.position = Eigen::Vector3d(0, 0, 100.0);
  s.linear_velocity = Eigen::Vector3d(1.0, 0.5, 2.0);
  s.angular_velocity = Eigen::Vector3d(0.3, 1.0, -0.5);
  const SimState s0 = s;
  const double e0 = trunk_energy(s, m);
  const double dt = 1e-3;
  for (int k = 0; k < 1000; ++k) {
    s = step(s, Vector8d::Zero(), m, t, dt);
    CHECK(std::abs(s.orientation.norm() - 1.0) < 1e-9);
  }
  const double time = 1.0;
  const Eigen::Vector3d expected = s0.position + s0.linear_velocity * time +
                                   0.5 * Eigen::Vector3d(0, 0, -m.gravity) * time * time;
  CHECK((s.position - expected).norm() < 1e-9);
  CHECK(std::abs(trunk_energy(s, m) - e0) <= 1e-3 * std::abs(e0));
}

TEST_CASE("standing robot settles to static equilibrium") {
  RobotModel m;
  Terrain t;
  SimState s = standing_state(m, t, 0.28);
  s.position.z() += 0.05;
  const Vector8d q_ref = s.joints.q;
  for (int k = 0; k < 2000; ++k) {
    s = step(s, hold(s, q_ref), m, t, 1e-3);
    CHECK((s.normal_forces.array() >= 0.0).all());
  }
  const double weight = m.total_mass() * m.gravity;
  CHECK(std::abs(s.normal_forces.sum() - weight) <= 0.02 * weight);
  // A lightly damped pitch mode is still ringing down; viscous stiction adds slow creep.
  CHECK(s.linear_velocity.norm() < 5e-3);
}

TEST_CASE("lower friction slips more on an incline") {
  RobotModel m;
  auto slip = [&](double mu) {
    Terrain t;
    t.slope_angle = 20.0 * std::numbers::pi / 180.0;
    t.friction_coefficient = mu;
    SimState s = standing_state(m, t, 0.28);
    const Vector8d q_ref = s.joints.q;
    for (int k = 0; k < 1500; ++k) s = step(s, hold(s, q_ref), m, t, 1e-3);
    return s.foot_slip.sum();
  };
  const double low = slip(0.3), high = slip(0.9);
  CHECK(low > high);
  CHECK(low > 0.05);
}

TEST_CASE("deterministic trajectories") {
  RobotModel m;
  Terrain t;
  auto run = [&] {
    SimState s = standing_state(m, t, 0.28);
    for (int k = 0; k < 500; ++k) {
      Vector8d tau;
      for (int j = 0; j < 8; ++j) tau[j] = 5.0 * std::sin(0.01 * k + j);
      s = step(s, tau, m, t, 1e-3);
    }
    return s;
  };
  const SimState a = run(), b = run();
  CHECK(a.position == b.position);
  CHECK(a.orientation.coeffs() == b.orientation.coeffs());
  CHECK(a.joints.q == b.joints.q);
  CHECK(a.normal_forces == b.normal_forces);
}

TEST_CASE("torques are clamped and bad states diverge loudly") {
  RobotModel m;
  Terrain t;
  SimState s;
  s.position.z() = 10.0;
  const SimState big = step(s, Vector8d::Constant(1e6), m, t, 1e-3);
  const SimState lim = step(s, Vector8d::Constant(m.torque_limit), m, t, 1e-3);
  CHECK(big.joints.qdot == lim.joints.qdot);
  s.linear_velocity.x() = NAN;
  CHECK_THROWS_AS(step(s, Vector8d::Zero(), m, t, 1e-3), SimulationDiverged);
}

TEST_CASE("standing pose on a slope") {
  RobotModel m;
  Terrain t;
  t.slope_angle = 0.2;
  t.anchor = Eigen::Vector3d(1.0, 0.0, 0.3);
  const SimState s = standing_state(m, t, 0.28, 3.0, 0.5);
  CHECK(trunk_height(s, t) == doctest::Approx(0.28));
  CHECK(trunk_attitude(s).pitch == doctest::Approx(-0.2));
  CHECK(s.linear_velocity.isZero(0.0));
}
