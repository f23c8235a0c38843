#include "cpgbo/controller.hpp"

#include <stdexcept>

namespace cpgbo {

std::string to_string(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::kOpenLoop: return "open-loop";
    case ControllerVariant::kVmc: return "vmc";
    case ControllerVariant::kTegotae: return "tegotae";
    case ControllerVariant::kVmcTegotae: return "vmc+tegotae";
  }
  return "unknown";
}

ControllerVariant parse_variant(std::string_view name) {
  if (name == "open-loop") return ControllerVariant::kOpenLoop;
  if (name == "vmc") return ControllerVariant::kVmc;
  if (name == "tegotae") return ControllerVariant::kTegotae;
  if (name == "vmc+tegotae") return ControllerVariant::kVmcTegotae;
  throw std::invalid_argument("unknown controller variant '" + std::string(name) + "'");
}

LocomotionController::LocomotionController(ControllerVariant variant, const RobotModel& model,
                                           const ControllerConfig& config)
    : variant_(variant), model_(model), config_(config) {}

void LocomotionController::reset(const SimState& state) {
  cpg_ = OscillatorNetworkState::trot_start();
  has_prev_ = false;
  target_ = TrunkAttitude{};
  target_.yaw = trunk_attitude(state).yaw;
  tau_vmc_.setZero();
}

Vector8d LocomotionController::tick(const SimState& state, const CpgParams& params) {
  const double dt = config_.dt;
  const LegGeometry& geom = model_.geom;

  if (uses_tegotae(variant_)) {
    cpg_ = step_network(cpg_, params, state.normal_forces, dt);
  } else {
    CpgParams open_loop = params;
    open_loop.sigma_n = 0.0;
    cpg_ = step_network(cpg_, open_loop, Eigen::Vector4d::Zero(), dt);
  }

  const auto targets = foot_targets(cpg_, params);
  Vector8d q_ref;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    q_ref.segment<2>(2 * leg) = inverse_kinematics(clamp_to_workspace(targets[leg], geom), geom);
  }
  const Vector8d qdot_ref = has_prev_ ? Vector8d((q_ref - q_ref_prev_) / dt) : Vector8d::Zero();
  q_ref_prev_ = q_ref;
  has_prev_ = true;

  Vector8d tau = pd_torque(state.joints, q_ref, qdot_ref, config_.joint_gains);

  tau_vmc_.setZero();
  if (uses_vmc(variant_)) {
    const Eigen::Vector3d wrench = vmc_wrench(trunk_attitude(state), target_, config_.vmc_gains);
    StanceFeet feet;
    feet.positions = foot_positions_body(state.joints, geom);
    std::array<Eigen::Matrix2d, kNumLegs> jacobians;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      feet.in_stance[leg] = state.normal_forces[leg] > kStanceForceThreshold;
      jacobians[leg] = foot_jacobian(leg_angles(state.joints.q, leg), geom);
    }
    tau_vmc_ = vmc_joint_torques(wrench, feet, jacobians);
    tau += tau_vmc_;
  }
  return tau;
}

}  // namespace cpgbo
