#include "cpgbo/sim.hpp"

#include <algorithm>
#include <cmath>

namespace cpgbo {

Eigen::Vector3d RobotModel::total_inertia() const {
  const Eigen::Vector3d& s = payload_size;
  const double k = payload_mass / 12.0;
  return trunk_inertia + Eigen::Vector3d(k * (s.y() * s.y() + s.z() * s.z()),
                                         k * (s.x() * s.x() + s.z() * s.z()),
                                         k * (s.x() * s.x() + s.y() * s.y()));
}

void RobotModel::validate() const {
  if (!(trunk_mass > 0.0)) throw std::invalid_argument("RobotModel: trunk_mass must be positive");
  if (!(payload_mass >= 0.0)) throw std::invalid_argument("RobotModel: payload must be >= 0");
  if (!(trunk_inertia.array() > 0.0).all()) {
    throw std::invalid_argument("RobotModel: trunk inertia must be positive");
  }
  if (!(joint_reflected_inertia > 0.0)) {
    throw std::invalid_argument("RobotModel: joint inertia must be positive");
  }
  if (!(torque_limit > 0.0)) throw std::invalid_argument("RobotModel: torque_limit must be positive");
  geom.validate();
}

Eigen::Vector3d Terrain::normal() const {
  return {-std::sin(slope_angle), 0.0, std::cos(slope_angle)};
}

double Terrain::height_above(const Eigen::Vector3d& p) const { return normal().dot(p - anchor); }

void Terrain::validate() const {
  if (!(friction_coefficient >= 0.0)) throw std::invalid_argument("Terrain: friction must be >= 0");
  if (!(contact_stiffness > 0.0)) throw std::invalid_argument("Terrain: stiffness must be > 0");
  if (!(contact_damping >= 0.0) || !(tangential_damping >= 0.0)) {
    throw std::invalid_argument("Terrain: damping must be >= 0");
  }
  if (!(std::abs(slope_angle) < 1.2)) throw std::invalid_argument("Terrain: slope out of range");
}

ContactForce contact_force(const Eigen::Vector3d& foot_position, const Eigen::Vector3d& foot_velocity,
                           const Terrain& terrain) {
  ContactForce out;
  const Eigen::Vector3d n = terrain.normal();
  const double depth = -terrain.height_above(foot_position);
  if (!(depth > 0.0)) return out;

  const double vn = n.dot(foot_velocity);
  out.normal = std::max(0.0, terrain.contact_stiffness * depth - terrain.contact_damping * vn);
  if (out.normal == 0.0) return out;

  const Eigen::Vector3d vt = foot_velocity - vn * n;
  Eigen::Vector3d ft = -terrain.tangential_damping * vt;
  const double limit = terrain.friction_coefficient * out.normal;
  const double mag = ft.norm();
  if (mag > limit) ft *= limit / mag;
  out.tangential = ft;
  return out;
}

namespace {

Eigen::Vector3d body_foot(const Eigen::Vector2d& fk, int leg, const LegGeometry& geom) {
  return geom.hip_positions[leg] + Eigen::Vector3d(fk.x(), geom.foot_y(leg) - geom.hip_positions[leg].y(), fk.y());
}

Eigen::Quaterniond exp_map(const Eigen::Vector3d& rotation) {
  const double angle = rotation.norm();
  if (angle < 1e-12) {
    return Eigen::Quaterniond(1.0, 0.5 * rotation.x(), 0.5 * rotation.y(), 0.5 * rotation.z());
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, rotation / angle));
}

}  // namespace

std::array<Eigen::Vector3d, kNumLegs> foot_positions_body(const JointState& joints,
                                                          const LegGeometry& geom) {
  std::array<Eigen::Vector3d, kNumLegs> out;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    out[leg] = body_foot(forward_kinematics(leg_angles(joints.q, leg), geom), leg, geom);
  }
  return out;
}

SimState step(const SimState& state, const Vector8d& tau_cmd, const RobotModel& model,
              const Terrain& terrain, double dt, const StepOptions& options) {
  if (!(dt > 0.0)) throw std::invalid_argument("sim::step: dt must be positive");
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt / options.max_substep - 1e-9)));
  const double h = dt / substeps;

  const Vector8d tau = tau_cmd.cwiseMax(-model.torque_limit).cwiseMin(model.torque_limit);
  const double mass = model.total_mass();
  const Eigen::Vector3d inertia = model.total_inertia();
  const Eigen::Vector3d g_vec(0.0, 0.0, -model.gravity);
  const Eigen::Vector3d n = terrain.normal();
  const double inv_joint_inertia = 1.0 / model.joint_reflected_inertia;

  SimState s = state;
  Eigen::Vector4d normal_sum = Eigen::Vector4d::Zero();

  for (int k = 0; k < substeps; ++k) {
    const Eigen::Matrix3d rot = s.orientation.toRotationMatrix();
    Eigen::Vector3d force = Eigen::Vector3d::Zero();
    Eigen::Vector3d moment = Eigen::Vector3d::Zero();
    Vector8d qddot;

    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Eigen::Vector2d q = leg_angles(s.joints.q, leg);
      const Eigen::Vector2d qd = s.joints.qdot.segment<2>(2 * leg);
      const Eigen::Vector2d fk = forward_kinematics(q, model.geom);
      const Eigen::Matrix2d jac = foot_jacobian(q, model.geom);
      const Eigen::Vector3d p_body = body_foot(fk, leg, model.geom);
      const Eigen::Vector2d v_rel = jac * qd;
      const Eigen::Vector3d v_body =
          s.angular_velocity.cross(p_body) + Eigen::Vector3d(v_rel.x(), 0.0, v_rel.y());

      const Eigen::Vector3d p_world = s.position + rot * p_body;
      const Eigen::Vector3d v_world = s.linear_velocity + rot * v_body;
      const ContactForce cf = contact_force(p_world, v_world, terrain);

      Eigen::Vector2d generalized = Eigen::Vector2d::Zero();
      if (cf.normal > 0.0) {
        const Eigen::Vector3d f_world = cf.normal * n + cf.tangential;
        const Eigen::Vector3d f_body = rot.transpose() * f_world;
        force += f_world;
        moment += p_body.cross(f_body);
        generalized = jac.transpose() * Eigen::Vector2d(f_body.x(), f_body.z());
        normal_sum[leg] += cf.normal;
        const Eigen::Vector3d vt = v_world - n.dot(v_world) * n;
        s.foot_slip[leg] += vt.norm() * h;
      }
      qddot.segment<2>(2 * leg) =
          inv_joint_inertia * (tau.segment<2>(2 * leg) - model.joint_damping * qd + generalized);
    }

    s.joints.qdot += h * qddot;
    s.joints.q += h * s.joints.qdot;

    // Semi-implicit Euler; the uniform gravity field is integrated exactly.
    s.linear_velocity += h * (force / mass + g_vec);
    s.position += h * s.linear_velocity - 0.5 * h * h * g_vec;

    const Eigen::Vector3d& w = s.angular_velocity;
    const Eigen::Vector3d iw = inertia.cwiseProduct(w);
    s.angular_velocity += h * (moment - w.cross(iw)).cwiseQuotient(inertia);
    s.orientation = (s.orientation * exp_map(h * s.angular_velocity)).normalized();
  }

  s.normal_forces = normal_sum / substeps;
  s.time = state.time + dt;

  if (!s.position.allFinite() || !s.linear_velocity.allFinite() ||
      !s.angular_velocity.allFinite() || !s.orientation.coeffs().allFinite() ||
      !s.joints.q.allFinite() || !s.joints.qdot.allFinite()) {
    throw SimulationDiverged("simulation state became non-finite");
  }
  return s;
}

RobotModel configure(const RobotModel& model, double payload_mass) {
  if (!(payload_mass >= 0.0)) throw std::invalid_argument("configure: payload must be >= 0");
  RobotModel out = model;
  out.payload_mass = payload_mass;
  return out;
}

TrunkAttitude trunk_attitude(const SimState& state) {
  const Eigen::Quaterniond& q = state.orientation;
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  TrunkAttitude a;
  a.roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  a.pitch = std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
  a.yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  a.roll_rate = state.angular_velocity.x();
  a.pitch_rate = state.angular_velocity.y();
  a.yaw_rate = state.angular_velocity.z();
  return a;
}

Eigen::Vector2d heading_velocity(const SimState& state) {
  const double yaw = trunk_attitude(state).yaw;
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Eigen::Vector3d& v = state.linear_velocity;
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}

SimState standing_state(const RobotModel& model, const Terrain& terrain, double height, double x,
                        double y, double x_foot) {
  SimState s;
  const Eigen::Vector3d on_plane(
      x, y, terrain.anchor.z() + (x - terrain.anchor.x()) * std::tan(terrain.slope_angle));
  s.position = on_plane + height * terrain.normal();
  s.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(-terrain.slope_angle, Eigen::Vector3d::UnitY()));
  FootTarget t;
  t.x = x_foot;
  t.z = -height;
  const Eigen::Vector2d q = inverse_kinematics(clamp_to_workspace(t, model.geom), model.geom);
  for (int leg = 0; leg < kNumLegs; ++leg) s.joints.q.segment<2>(2 * leg) = q;
  return s;
}

double trunk_height(const SimState& state, const Terrain& terrain) {
  return terrain.height_above(state.position);
}

double trunk_energy(const SimState& state, const RobotModel& model) {
  const double m = model.total_mass();
  const Eigen::Vector3d inertia = model.total_inertia();
  const Eigen::Vector3d& w = state.angular_velocity;
  return 0.5 * m * state.linear_velocity.squaredNorm() + 0.5 * w.dot(inertia.cwiseProduct(w)) +
         m * model.gravity * state.position.z();
}

}  // namespace cpgbo
