#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Core>

#include "cpgbo/cpg.hpp"

namespace cpgbo {

using Vector8d = Eigen::Matrix<double, 8, 1>;

/// Planar two-link leg (hip pitch + knee), abduction fixed.
///
/// Sign convention, in the hip frame with x forward and z up:
///   foot_x = -l_thigh * sin(q_hip) - l_calf * sin(q_hip - q_knee)
///   foot_z = -l_thigh * cos(q_hip) - l_calf * cos(q_hip - q_knee)
/// q = (0, 0) is the leg hanging straight down; positive hip pitch swings the
/// leg backwards; a positive knee angle folds the calf forward, which places
/// the knee behind the hip-foot line (knee-backward).
struct LegGeometry {
  double l_thigh = 0.213;
  double l_calf = 0.213;
  double hip_offset_y = 0.08;
  // Hip mount points in the trunk frame, leg order FR, FL, RR, RL.
  std::array<Eigen::Vector3d, kNumLegs> hip_positions = {
      Eigen::Vector3d(0.1881, -0.04675, 0.0), Eigen::Vector3d(0.1881, 0.04675, 0.0),
      Eigen::Vector3d(-0.1881, -0.04675, 0.0), Eigen::Vector3d(-0.1881, 0.04675, 0.0)};

  /// Lateral foot position of a leg in the trunk frame.
  double foot_y(int leg) const;
  double max_reach() const { return l_thigh + l_calf; }
  double min_reach() const;
  void validate() const;
};

struct JointState {
  Vector8d q = Vector8d::Zero();     // (hip, knee) per leg, legs in FR, FL, RR, RL order
  Vector8d qdot = Vector8d::Zero();
};

struct JointGains {
  double kp = 70.0;
  double kd = 1.3;
};

class WorkspaceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Foot position (x, z) in the hip frame.
Eigen::Vector2d forward_kinematics(const Eigen::Vector2d& q, const LegGeometry& geom);

/// Knee-backward solution. Throws WorkspaceError if the target is outside
/// the closed annulus [|l_thigh - l_calf|, l_thigh + l_calf].
Eigen::Vector2d inverse_kinematics(const FootTarget& target, const LegGeometry& geom);

/// Pulls a target radially onto the reachable annulus (shrunk by `margin`).
FootTarget clamp_to_workspace(const FootTarget& target, const LegGeometry& geom,
                              double margin = 1e-6);

/// d(foot x, foot z) / d(q_hip, q_knee).
Eigen::Matrix2d foot_jacobian(const Eigen::Vector2d& q, const LegGeometry& geom);

/// tau = kp * (q_ref - q) + kd * (qdot_ref - qdot)
Vector8d pd_torque(const JointState& state, const Vector8d& q_ref, const Vector8d& qdot_ref,
                   const JointGains& gains);

inline Eigen::Vector2d leg_angles(const Vector8d& q, int leg) { return q.segment<2>(2 * leg); }

}  // namespace cpgbo
