#include "cpgbo/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpgbo {

void ObjectiveConfig::validate() const {
  if (!(w1 > 0.0 && w2 > 0.0 && dt > 0.0 && steps > 0 && reward_cap > 0.0 &&
        velocity_bandwidth > 0.0 && gravity > 0.0)) {
    throw std::invalid_argument("ObjectiveConfig: weights, dt, T, l_r and bandwidth must be positive");
  }
}

double joint_power(const Vector8d& torque, const Vector8d& qdot) {
  return torque.cwiseAbs().dot(qdot.cwiseAbs());
}

void TrialRecord::push_sample(const Eigen::Vector2d& heading_velocity, const Vector8d& torque,
                              const Vector8d& qdot, const Eigen::Vector4d& normal_forces,
                              double pitch_angle) {
  velocity_x.push_back(heading_velocity.x());
  velocity_y.push_back(heading_velocity.y());
  joint_torque.push_back(torque);
  joint_velocity.push_back(qdot);
  joint_power.push_back(cpgbo::joint_power(torque, qdot));
  normal_force.push_back(normal_forces);
  pitch.push_back(pitch_angle);
}

double TrialRecord::mean_velocity_x() const {
  if (velocity_x.empty()) return 0.0;
  double sum = 0.0;
  for (double v : velocity_x) sum += v;
  return sum / static_cast<double>(velocity_x.size());
}

double cost_of_transport(const TrialRecord& record, const ObjectiveConfig& cfg) {
  if (record.distance < cfg.min_distance) return cfg.cot_cap;
  double energy = 0.0;
  for (double p : record.joint_power) energy += p;
  return energy * cfg.dt / (record.total_mass * cfg.gravity * record.distance);
}

double velocity_reward(double vx, double vy, double v_star, const ObjectiveConfig& cfg) {
  const double ex = vx - v_star;
  return std::min(std::exp(-(ex * ex + vy * vy) / cfg.velocity_bandwidth), cfg.reward_cap);
}

double objective_value(const TrialRecord& record, double v_star, const ObjectiveConfig& cfg) {
  if (record.aborted) return cfg.abort_objective;
  double reward = 0.0;
  const std::size_t n = std::min(record.velocity_x.size(), record.velocity_y.size());
  for (std::size_t i = 0; i < n; ++i) {
    reward += velocity_reward(record.velocity_x[i], record.velocity_y[i], v_star, cfg);
  }
  return cfg.w1 * cfg.dt * reward - cfg.w2 * cost_of_transport(record, cfg);
}

ContextVector estimate_context(const TrialRecord& record) {
  ContextVector c;
  const std::size_t n = record.normal_force.size();
  if (n > 0) {
    double load = 0.0;
    for (const auto& f : record.normal_force) load += f.sum();
    c.load = load / (4.0 * static_cast<double>(n));
  }
  if (!record.pitch.empty()) {
    double pitch = 0.0;
    for (double p : record.pitch) pitch += p;
    c.slope = pitch / static_cast<double>(record.pitch.size());
  }
  return c;
}

void NormalizationRanges::validate() const {
  for (const auto& r : params) {
    if (!(r.lo < r.hi)) throw std::invalid_argument("NormalizationRanges: lo must be < hi");
  }
  if (!(load.lo < load.hi) || !(slope.lo < slope.hi)) {
    throw std::invalid_argument("NormalizationRanges: context lo must be < hi");
  }
}

double normalize(double value, const Range& range) {
  return std::clamp((value - range.lo) / (range.hi - range.lo), 0.0, 1.0);
}

double denormalize(double unit, const Range& range) {
  return range.lo + std::clamp(unit, 0.0, 1.0) * (range.hi - range.lo);
}

std::array<double, CpgParams::kNumOptimized> normalize(const CpgParams& params,
                                                       const NormalizationRanges& ranges) {
  const auto values = params.optimized();
  std::array<double, CpgParams::kNumOptimized> out{};
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = normalize(values[d], ranges.params[d]);
  return out;
}

CpgParams denormalize(std::span<const double, CpgParams::kNumOptimized> unit,
                      const NormalizationRanges& ranges, const CpgParams& base) {
  std::array<double, CpgParams::kNumOptimized> values{};
  for (std::size_t d = 0; d < values.size(); ++d) values[d] = denormalize(unit[d], ranges.params[d]);
  CpgParams out = base;
  out.set_optimized(values);
  return out;
}

std::array<double, kContextDims> normalize(const ContextVector& context,
                                           const NormalizationRanges& ranges) {
  return {normalize(context.load, ranges.load), normalize(context.slope, ranges.slope)};
}

ContextVector denormalize(std::span<const double, kContextDims> unit,
                          const NormalizationRanges& ranges) {
  return {denormalize(unit[0], ranges.load), denormalize(unit[1], ranges.slope)};
}

}  // namespace cpgbo
