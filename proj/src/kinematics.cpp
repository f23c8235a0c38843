#include "cpgbo/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace cpgbo {

double LegGeometry::foot_y(int leg) const {
  const double side = (leg == 0 || leg == 2) ? -1.0 : 1.0;  // right legs at -y
  return hip_positions[leg].y() + side * hip_offset_y;
}

double LegGeometry::min_reach() const { return std::abs(l_thigh - l_calf); }

void LegGeometry::validate() const {
  if (!(l_thigh > 0.0) || !(l_calf > 0.0)) {
    throw std::invalid_argument("LegGeometry: link lengths must be positive");
  }
}

Eigen::Vector2d forward_kinematics(const Eigen::Vector2d& q, const LegGeometry& geom) {
  const double a = q[0];
  const double b = q[0] - q[1];
  return {-geom.l_thigh * std::sin(a) - geom.l_calf * std::sin(b),
          -geom.l_thigh * std::cos(a) - geom.l_calf * std::cos(b)};
}

Eigen::Vector2d inverse_kinematics(const FootTarget& target, const LegGeometry& geom) {
  const double l1 = geom.l_thigh;
  const double l2 = geom.l_calf;
  const double d2 = target.x * target.x + target.z * target.z;
  const double d = std::sqrt(d2);
  if (!std::isfinite(d) || d > l1 + l2 || d < std::abs(l1 - l2)) {
    throw WorkspaceError("inverse_kinematics: foot target outside leg workspace");
  }
  const double c = std::clamp((d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double knee = std::acos(c);
  // Angle of the hip->foot direction measured from straight down, positive backwards.
  const double psi = std::atan2(-target.x, -target.z);
  const double beta = std::atan2(l2 * std::sin(knee), l1 + l2 * std::cos(knee));
  return {psi + beta, knee};
}

FootTarget clamp_to_workspace(const FootTarget& target, const LegGeometry& geom, double margin) {
  const double d = std::hypot(target.x, target.z);
  const double hi = geom.max_reach() - margin;
  const double lo = geom.min_reach() + margin;
  FootTarget out = target;
  if (d > hi) {
    out.x *= hi / d;
    out.z *= hi / d;
  } else if (d < lo) {
    if (d > 0.0) {
      out.x *= lo / d;
      out.z *= lo / d;
    } else {
      out.x = 0.0;
      out.z = -lo;
    }
  }
  return out;
}

Eigen::Matrix2d foot_jacobian(const Eigen::Vector2d& q, const LegGeometry& geom) {
  const double a = q[0];
  const double b = q[0] - q[1];
  const double c1 = std::cos(a), s1 = std::sin(a);
  const double c12 = std::cos(b), s12 = std::sin(b);
  Eigen::Matrix2d j;
  j << -geom.l_thigh * c1 - geom.l_calf * c12, geom.l_calf * c12,
        geom.l_thigh * s1 + geom.l_calf * s12, -geom.l_calf * s12;
  return j;
}

Vector8d pd_torque(const JointState& state, const Vector8d& q_ref, const Vector8d& qdot_ref,
                   const JointGains& gains) {
  return gains.kp * (q_ref - state.q) + gains.kd * (qdot_ref - state.qdot);
}

}  // namespace cpgbo
