#pragma once

#include <string>
#include <string_view>

#include "cpgbo/cpg.hpp"
#include "cpgbo/kinematics.hpp"
#include "cpgbo/sim.hpp"
#include "cpgbo/vmc.hpp"

namespace cpgbo {

enum class ControllerVariant { kOpenLoop, kVmc, kTegotae, kVmcTegotae };

inline constexpr bool uses_vmc(ControllerVariant v) {
  return v == ControllerVariant::kVmc || v == ControllerVariant::kVmcTegotae;
}
inline constexpr bool uses_tegotae(ControllerVariant v) {
  return v == ControllerVariant::kTegotae || v == ControllerVariant::kVmcTegotae;
}

std::string to_string(ControllerVariant v);
/// Accepts "open-loop", "vmc", "tegotae", "vmc+tegotae". Throws std::invalid_argument.
ControllerVariant parse_variant(std::string_view name);

struct ControllerConfig {
  JointGains joint_gains;
  VmcGains vmc_gains;
  double dt = 1e-3;
};

/// CPG -> foot targets -> IK -> joint PD, plus optional force feedback into
/// the phase dynamics and optional VMC posture torques.
class LocomotionController {
 public:
  LocomotionController(ControllerVariant variant, const RobotModel& model,
                       const ControllerConfig& config = {});

  /// Restarts the oscillators from a small-amplitude trot and holds the
  /// current trunk heading as the yaw target.
  void reset(const SimState& state);

  /// One control tick: returns tau_cmd = tau_ref (+ tau_vmc).
  Vector8d tick(const SimState& state, const CpgParams& params);

  void set_model(const RobotModel& model) { model_ = model; }
  ControllerVariant variant() const { return variant_; }
  const OscillatorNetworkState& oscillators() const { return cpg_; }
  const Vector8d& last_vmc_torque() const { return tau_vmc_; }

 private:
  ControllerVariant variant_;
  RobotModel model_;
  ControllerConfig config_;
  OscillatorNetworkState cpg_ = OscillatorNetworkState::trot_start();
  Vector8d q_ref_prev_ = Vector8d::Zero();
  bool has_prev_ = false;
  TrunkAttitude target_;
  Vector8d tau_vmc_ = Vector8d::Zero();
};

}  // namespace cpgbo
