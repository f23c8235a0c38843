#include "cpgbo/vmc.hpp"

#include <Eigen/QR>

namespace cpgbo {

Eigen::Vector3d vmc_wrench(const TrunkAttitude& attitude, const TrunkAttitude& target,
                           const VmcGains& gains) {
  const double d = gains.damping_ratio;
  return {gains.k_att_r * wrap_pi(target.roll - attitude.roll) -
              d * gains.k_att_r * attitude.roll_rate,
          gains.k_att_p * wrap_pi(target.pitch - attitude.pitch) -
              d * gains.k_att_p * attitude.pitch_rate,
          gains.k_dir * wrap_pi(target.yaw - attitude.yaw) - d * gains.k_dir * attitude.yaw_rate};
}

namespace {

// Moment of a force (fx, 0, fz) applied at p: p x F.
Eigen::Matrix<double, 3, 2> moment_map(const Eigen::Vector3d& p) {
  Eigen::Matrix<double, 3, 2> m;
  m << 0.0, p.y(),
       p.z(), -p.x(),
      -p.y(), 0.0;
  return m;
}

// The corrective wrench is a pure moment, so the foot forces must also sum to
// zero; otherwise a pitch correction pushes the trunk forwards or backwards.
// Net-force rows are scaled by this lever arm [m] to be commensurate with moments.
constexpr double kNetForceScale = 0.2;

}  // namespace

std::array<Eigen::Vector2d, kNumLegs> distribute_wrench(const Eigen::Vector3d& wrench,
                                                        const StanceFeet& feet) {
  std::array<Eigen::Vector2d, kNumLegs> forces;
  for (auto& f : forces) f.setZero();

  std::array<int, kNumLegs> idx{};
  int n = 0;
  for (int i = 0; i < kNumLegs; ++i) {
    if (feet.in_stance[i]) idx[n++] = i;
  }
  if (n == 0 || wrench.isZero(0.0)) return forces;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 2 * n);
  for (int k = 0; k < n; ++k) {
    a.block<3, 2>(0, 2 * k) = moment_map(feet.positions[idx[k]]);
    a.block<2, 2>(3, 2 * k) = kNetForceScale * Eigen::Matrix2d::Identity();
  }
  Eigen::Matrix<double, 5, 1> b;
  b << wrench, 0.0, 0.0;

  // Minimum-norm least-squares solution.
  const Eigen::VectorXd f = a.completeOrthogonalDecomposition().solve(b);
  for (int k = 0; k < n; ++k) forces[idx[k]] = f.segment<2>(2 * k);
  return forces;
}

Eigen::Vector3d moment_of_forces(const StanceFeet& feet,
                                 const std::array<Eigen::Vector2d, kNumLegs>& forces) {
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  for (int i = 0; i < kNumLegs; ++i) m += moment_map(feet.positions[i]) * forces[i];
  return m;
}

Vector8d vmc_joint_torques(const Eigen::Vector3d& wrench, const StanceFeet& feet,
                           const std::array<Eigen::Matrix2d, kNumLegs>& jacobians) {
  const auto forces = distribute_wrench(wrench, feet);
  Vector8d tau = Vector8d::Zero();
  for (int i = 0; i < kNumLegs; ++i) {
    if (!feet.in_stance[i]) continue;
    tau.segment<2>(2 * i) = -jacobians[i].transpose() * forces[i];
  }
  return tau;
}

}  // namespace cpgbo
