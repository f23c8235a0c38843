#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "cpgbo/kinematics.hpp"

using namespace cpgbo;
constexpr double kPi = std::numbers::pi;

TEST_CASE("forward kinematics at reference configurations") {
  LegGeometry g;
  const double l = g.l_thigh + g.l_calf;
  const Eigen::Vector2d zero = forward_kinematics({0.0, 0.0}, g);
  CHECK(zero.x() == doctest::Approx(0.0));
  CHECK(zero.y() == doctest::Approx(-l));
  const Eigen::Vector2d quarter = forward_kinematics({kPi / 2, 0.0}, g);
  CHECK(quarter.x() == doctest::Approx(-l));
  CHECK(quarter.y() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("inverse kinematics at the workspace boundary") {
  LegGeometry g;
  FootTarget t;
  t.x = 0.0;
  t.z = -(g.l_thigh + g.l_calf);
  const Eigen::Vector2d q = inverse_kinematics(t, g);
  CHECK(q[1] == doctest::Approx(0.0));
  CHECK(q[0] == doctest::Approx(0.0));
  t.z -= 0.01;
  CHECK_THROWS_AS(inverse_kinematics(t, g), WorkspaceError);
}

TEST_CASE("IK/FK round trip over random reachable targets") {
  LegGeometry g;
  g.l_thigh = 0.22;
  g.l_calf = 0.2;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ur(g.min_reach() + 1e-3, g.max_reach() - 1e-3);
  std::uniform_real_distribution<double> ua(-kPi, kPi);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double r = ur(rng), a = ua(rng);
    FootTarget t;
    t.x = r * std::sin(a);
    t.z = -r * std::cos(a);
    const Eigen::Vector2d q = inverse_kinematics(t, g);
    CHECK(q[1] > 0.0);
    CHECK(q[1] < kPi);
    const Eigen::Vector2d p = forward_kinematics(q, g);
    worst = std::max(worst, std::hypot(p.x() - t.x, p.y() - t.z));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("clamp_to_workspace makes targets reachable") {
  LegGeometry g;
  FootTarget far;
  far.x = 0.3;
  far.z = -0.5;
  const FootTarget c = clamp_to_workspace(far, g);
  CHECK(std::hypot(c.x, c.z) <= g.max_reach());
  CHECK(std::atan2(c.x, c.z) == doctest::Approx(std::atan2(far.x, far.z)));
  CHECK_NOTHROW(inverse_kinematics(c, g));
  FootTarget inside;
  inside.x = 0.05;
  inside.z = -0.3;
  const FootTarget same = clamp_to_workspace(inside, g);
  CHECK(same.x == inside.x);
  CHECK(same.z == inside.z);
}

TEST_CASE("Jacobian matches central differences") {
  LegGeometry g;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uh(-1.2, 1.2), uk(0.2, 2.8);
  const double h = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Vector2d q(uh(rng), uk(rng));
    const Eigen::Matrix2d j = foot_jacobian(q, g);
    Eigen::Matrix2d fd;
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d dq = Eigen::Vector2d::Zero();
      dq[c] = h;
      fd.col(c) = (forward_kinematics(q + dq, g) - forward_kinematics(q - dq, g)) / (2 * h);
    }
    CHECK((j - fd).norm() <= 1e-6 * j.norm());
  }
}

TEST_CASE("Jacobian at the zero configuration") {
  LegGeometry g;
  const Eigen::Matrix2d j = foot_jacobian({0.0, 0.0}, g);
  // Hip moves the whole chain, the knee only the calf; both move the foot along x.
  CHECK(j.col(0).norm() == doctest::Approx(g.l_thigh + g.l_calf));
  CHECK(j.col(1).norm() == doctest::Approx(g.l_calf));
  CHECK(j.determinant() == doctest::Approx(0.0));
  CHECK(foot_jacobian({0.4, 0.0}, g).determinant() == doctest::Approx(0.0));
}

TEST_CASE("PD torque") {
  JointState s;
  Vector8d q_ref = Vector8d::Zero(), qd_ref = Vector8d::Zero();
  JointGains gains;
  CHECK(pd_torque(s, q_ref, qd_ref, gains).isZero());
  q_ref[3] = 1.0;
  const Vector8d tau = pd_torque(s, q_ref, qd_ref, gains);
  CHECK(tau[3] == 70.0);
  CHECK(pd_torque(s, 2 * q_ref, qd_ref, gains) == 2 * tau);
  s.qdot[1] = 2.0;
  CHECK(pd_torque(s, Vector8d::Zero(), qd_ref, gains)[1] == doctest::Approx(-2.6));
}

TEST_CASE("geometry validation") {
  LegGeometry g;
  CHECK_NOTHROW(g.validate());
  g.l_calf = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}
