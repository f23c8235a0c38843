#pragma once

#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cpgbo/kinematics.hpp"
#include "cpgbo/vmc.hpp"

namespace cpgbo {

/// Rigid trunk with massless legs. Each joint has a reflected rotor inertia
/// and viscous damping; contact forces act on the trunk at the feet.
struct RobotModel {
  double trunk_mass = 12.0;                                        // nominal, without payload
  Eigen::Vector3d trunk_inertia = Eigen::Vector3d(0.07, 0.26, 0.28);  // principal, kg m^2
  double payload_mass = 0.0;
  Eigen::Vector3d payload_size = Eigen::Vector3d(0.30, 0.15, 0.10);  // box dimensions [m]
  double gravity = 9.81;
  double joint_reflected_inertia = 0.02;
  double joint_damping = 0.01;
  double torque_limit = 33.5;
  LegGeometry geom;

  double total_mass() const { return trunk_mass + payload_mass; }
  /// Principal inertia of trunk plus a solid-box payload centred on the CoM.
  Eigen::Vector3d total_inertia() const;
  void validate() const;
};

/// Inclined plane through `anchor`, rotated about the world y-axis so that it
/// rises towards +x for positive slope angles.
struct Terrain {
  double slope_angle = 0.0;          // [rad]
  double friction_coefficient = 0.9;
  double contact_stiffness = 1.0e4;  // [N/m]
  double contact_damping = 300.0;    // [N s/m]
  double tangential_damping = 1.0e3; // stiction regularization [N s/m]
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();

  Eigen::Vector3d normal() const;
  /// Signed distance of a world point above the plane.
  double height_above(const Eigen::Vector3d& p) const;
  void validate() const;
};

struct ContactForce {
  double normal = 0.0;
  Eigen::Vector3d tangential = Eigen::Vector3d::Zero();
};

/// Penalty contact: N = max(0, k*depth - d*v_n); tangential force is
/// viscous in the slip velocity and clamped to the Coulomb cone.
ContactForce contact_force(const Eigen::Vector3d& foot_position, const Eigen::Vector3d& foot_velocity,
                           const Terrain& terrain);

struct SimState {
  Eigen::Vector3d position = Eigen::Vector3d(0.0, 0.0, 0.3);
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();   // world frame
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();  // trunk frame
  JointState joints;
  Eigen::Vector4d normal_forces = Eigen::Vector4d::Zero();  // mean over the last step
  Eigen::Vector4d foot_slip = Eigen::Vector4d::Zero();      // accumulated tangential slip [m]
  double time = 0.0;
};

class SimulationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepOptions {
  // Contact and joint dynamics are integrated in sub-steps no longer than this.
  double max_substep = 1.25e-4;
};

/// Advances the simulation by dt with zero-order-hold torques (clamped to the
/// torque limit). Semi-implicit Euler; quaternion renormalized each sub-step.
/// Throws SimulationDiverged if the state becomes non-finite.
SimState step(const SimState& state, const Vector8d& tau_cmd, const RobotModel& model,
              const Terrain& terrain, double dt, const StepOptions& options = {});

/// Adds payload to the trunk. Throws std::invalid_argument for negative mass.
RobotModel configure(const RobotModel& model, double payload_mass);

/// Attitude (ZYX Euler angles and trunk-frame rates) of a state.
TrunkAttitude trunk_attitude(const SimState& state);

/// Heading-frame (yaw-aligned) horizontal velocity (v_x, v_y).
Eigen::Vector2d heading_velocity(const SimState& state);

/// Foot positions relative to the CoM in the trunk frame.
std::array<Eigen::Vector3d, kNumLegs> foot_positions_body(const JointState& joints,
                                                          const LegGeometry& geom);

/// Trunk aligned with the terrain plane at `height` along the normal above
/// the plane point below (x, y), at rest, joints set so that feet sit at
/// (x_foot, -height) in each hip frame.
SimState standing_state(const RobotModel& model, const Terrain& terrain, double height,
                        double x = 0.0, double y = 0.0, double x_foot = 0.0);

/// Trunk CoM height above terrain along the plane normal.
double trunk_height(const SimState& state, const Terrain& terrain);

/// Trunk kinetic plus gravitational potential energy.
double trunk_energy(const SimState& state, const RobotModel& model);

}  // namespace cpgbo
