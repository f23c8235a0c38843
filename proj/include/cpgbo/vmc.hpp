#pragma once

#include <array>

#include <Eigen/Core>

#include "cpgbo/kinematics.hpp"

namespace cpgbo {

/// Virtual spring stiffnesses on trunk yaw (direction), roll and pitch.
/// Each axis also gets a virtual damper of damping_ratio * stiffness.
struct VmcGains {
  double k_dir = 300.0;
  double k_att_r = 150.0;
  double k_att_p = 160.0;
  double damping_ratio = 0.1;
};

struct TrunkAttitude {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  double roll_rate = 0.0;
  double pitch_rate = 0.0;
  double yaw_rate = 0.0;
};

/// Stance leg counts as supporting once its normal force exceeds this [N].
inline constexpr double kStanceForceThreshold = 5.0;

struct StanceFeet {
  std::array<Eigen::Vector3d, kNumLegs> positions;  // trunk frame, relative to the CoM
  std::array<bool, kNumLegs> in_stance{};
};

/// Corrective trunk moments (roll, pitch, yaw) [N m] from the virtual
/// spring-dampers. Angle errors are wrapped into (-pi, pi].
Eigen::Vector3d vmc_wrench(const TrunkAttitude& attitude, const TrunkAttitude& target,
                           const VmcGains& gains);

/// Distributes `wrench` over the stance feet as sagittal (x, z) ground
/// reaction forces with minimum norm in the least-squares sense, then maps
/// them to joint torques with tau = -J^T F. Swing legs get zero torque; with
/// no stance legs the result is all zeros.
///
/// `jacobians[i]` is the (x, z) foot Jacobian of leg i in the trunk frame.
Vector8d vmc_joint_torques(const Eigen::Vector3d& wrench, const StanceFeet& feet,
                           const std::array<Eigen::Matrix2d, kNumLegs>& jacobians);

/// Ground reaction forces chosen by the distribution step, (x, z) per leg.
std::array<Eigen::Vector2d, kNumLegs> distribute_wrench(const Eigen::Vector3d& wrench,
                                                        const StanceFeet& feet);

/// Moment about the CoM produced by sagittal foot forces.
Eigen::Vector3d moment_of_forces(const StanceFeet& feet,
                                 const std::array<Eigen::Vector2d, kNumLegs>& forces);

}  // namespace cpgbo
