#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cpgbo/cpg.hpp"
#include "cpgbo/kinematics.hpp"

namespace cpgbo {

struct ObjectiveConfig {
  double w1 = 1.0;
  double w2 = 0.5;
  double dt = 0.001;
  int steps = 3000;                 // T
  double reward_cap = 0.85;         // l_r
  double velocity_bandwidth = 0.05;
  double gravity = 9.81;
  double cot_cap = 10.0;            // assigned when the robot barely moved
  double min_distance = 0.01;       // [m]
  double abort_objective = -1.0;

  /// Upper bound of the velocity term, w1 * dt * T * l_r.
  double max_velocity_term() const { return w1 * dt * steps * reward_cap; }
  void validate() const;
};

struct ContextVector {
  double load = 0.0;   // mean foot normal force [N]
  double slope = 0.0;  // mean trunk pitch [rad]
};

/// Steady-state data of one trial plus everything derived from it.
struct TrialRecord {
  std::vector<double> velocity_x;          // heading frame [m/s]
  std::vector<double> velocity_y;
  std::vector<Vector8d> joint_torque;      // applied (clamped) torques
  std::vector<Vector8d> joint_velocity;
  std::vector<double> joint_power;         // <|tau|, |qdot|> per step [W]
  std::vector<Eigen::Vector4d> normal_force;
  std::vector<double> pitch;

  double distance = 0.0;    // [m]
  double total_mass = 0.0;  // [kg]
  double v_star = 0.0;      // target velocity the objective was computed for
  double objective = 0.0;
  double cost_of_transport = 0.0;
  ContextVector context;
  CpgParams params;
  bool aborted = false;

  std::size_t samples() const { return velocity_x.size(); }
  /// Appends one control tick of data; joint_power is derived here.
  void push_sample(const Eigen::Vector2d& heading_velocity, const Vector8d& torque,
                   const Vector8d& qdot, const Eigen::Vector4d& normal_forces, double pitch_angle);
  double mean_velocity_x() const;
};

/// <|tau|, |qdot|>
double joint_power(const Vector8d& torque, const Vector8d& qdot);

/// Sum of joint power * dt over (m g d). Returns cfg.cot_cap when the distance
/// is below cfg.min_distance.
double cost_of_transport(const TrialRecord& record, const ObjectiveConfig& cfg = {});

/// Per-step velocity reward min(exp(-|v - (v*, 0)|^2 / bandwidth), l_r).
double velocity_reward(double vx, double vy, double v_star, const ObjectiveConfig& cfg);

/// w1 * dt * sum(velocity_reward) - w2 * CoT; aborted trials score
/// cfg.abort_objective.
double objective_value(const TrialRecord& record, double v_star, const ObjectiveConfig& cfg = {});

/// Mean foot normal force over all feet and samples, and mean pitch.
ContextVector estimate_context(const TrialRecord& record);

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

struct NormalizationRanges {
  std::array<Range, CpgParams::kNumOptimized> params = {{{0.06, 0.10},
                                                          {0.005, 0.015},
                                                          {16.0, 23.0},
                                                          {10.0, 15.0},
                                                          {0.9, 1.7},
                                                          {-0.06, -0.01},
                                                          {-0.06, -0.01},
                                                          {0.05, 0.30}}};
  Range load{15.0, 55.0};
  Range slope{-0.4, 0.1};

  void validate() const;
};

inline constexpr std::size_t kContextDims = 2;
inline constexpr std::size_t kInputDims = CpgParams::kNumOptimized + kContextDims;

double normalize(double value, const Range& range);
double denormalize(double unit, const Range& range);

/// Optimized fields mapped to [0, 1]^8 (clamped).
std::array<double, CpgParams::kNumOptimized> normalize(const CpgParams& params,
                                                       const NormalizationRanges& ranges);
/// Inverse map; fixed fields are copied from `base`.
CpgParams denormalize(std::span<const double, CpgParams::kNumOptimized> unit,
                      const NormalizationRanges& ranges, const CpgParams& base = {});

std::array<double, kContextDims> normalize(const ContextVector& context,
                                           const NormalizationRanges& ranges);
ContextVector denormalize(std::span<const double, kContextDims> unit,
                          const NormalizationRanges& ranges);

}  // namespace cpgbo
