#include "cpgbo/cpg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpgbo {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

Eigen::Matrix4d trot_coupling() {
  Eigen::Matrix4d phi;
  // clang-format off
  phi <<  0.0,  kPi,  kPi,  0.0,
         -kPi,  0.0,  0.0, -kPi,
         -kPi,  0.0,  0.0, -kPi,
          0.0,  kPi,  kPi,  0.0;
  // clang-format on
  return phi;
}

std::array<double, CpgParams::kNumOptimized> CpgParams::optimized() const {
  return {ground_clearance, ground_penetration, omega_swing,    omega_stance,
          mu,               x_offset_front,     x_offset_hind,  sigma_n};
}

void CpgParams::set_optimized(std::span<const double, kNumOptimized> v) {
  ground_clearance = v[0];
  ground_penetration = v[1];
  omega_swing = v[2];
  omega_stance = v[3];
  mu = v[4];
  x_offset_front = v[5];
  x_offset_hind = v[6];
  sigma_n = v[7];
}

void CpgParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("CpgParams: alpha must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("CpgParams: mu must be positive");
  if (!(step_length > 0.0)) throw std::invalid_argument("CpgParams: step_length must be positive");
  if (!(body_height > 0.0)) throw std::invalid_argument("CpgParams: body_height must be positive");
  for (double v : optimized()) {
    if (!std::isfinite(v)) throw std::invalid_argument("CpgParams: non-finite parameter");
  }
}

OscillatorNetworkState OscillatorNetworkState::trot_start(double amplitude) {
  OscillatorNetworkState s;
  s.r.setConstant(amplitude);
  // theta_j - theta_i = phi_ij with phi_01 = pi.
  s.theta << 1.5 * kPi, 0.5 * kPi, 0.5 * kPi, 1.5 * kPi;
  return s;
}

double wrap_phase(double angle) {
  double w = std::fmod(angle, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod of a tiny negative number can round up to exactly 2*pi.
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double wrap_pi(double angle) {
  double w = wrap_phase(angle + kPi) - kPi;
  if (w <= -kPi) w += kTwoPi;
  return w;
}

double intrinsic_frequency(double theta, const CpgParams& params) {
  return std::sin(theta) > 0.0 ? params.omega_swing : params.omega_stance;
}

void network_derivatives(const OscillatorNetworkState& state, const CpgParams& params,
                         const Eigen::Vector4d& normal_forces, Eigen::Vector4d& r_dot,
                         Eigen::Vector4d& theta_dot) {
  const double mu2 = params.mu * params.mu;
  for (int i = 0; i < kNumLegs; ++i) {
    const double ri = state.r[i];
    const double ti = state.theta[i];
    r_dot[i] = params.alpha * (mu2 - ri * ri) * ri;

    double coupling = 0.0;
    for (int j = 0; j < kNumLegs; ++j) {
      coupling += state.r[j] * params.coupling_weights(i, j) *
                  std::sin(state.theta[j] - ti - params.phase_lags(i, j));
    }
    theta_dot[i] = intrinsic_frequency(ti, params) + coupling -
                   params.sigma_n * normal_forces[i] * std::cos(ti);
  }
}

OscillatorNetworkState step_network(const OscillatorNetworkState& state, const CpgParams& params,
                                    const Eigen::Vector4d& normal_forces, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step_network: dt must be positive and finite");
  }
  if (!state.r.allFinite() || !state.theta.allFinite()) {
    throw std::invalid_argument("step_network: non-finite oscillator state");
  }
  if (!normal_forces.allFinite()) {
    throw std::invalid_argument("step_network: non-finite normal force");
  }

  Eigen::Vector4d r_dot;
  Eigen::Vector4d theta_dot;
  network_derivatives(state, params, normal_forces, r_dot, theta_dot);

  OscillatorNetworkState next;
  for (int i = 0; i < kNumLegs; ++i) {
    next.r[i] = std::max(0.0, state.r[i] + dt * r_dot[i]);
    next.theta[i] = wrap_phase(state.theta[i] + dt * theta_dot[i]);
  }
  return next;
}

FootTarget foot_target(double r, double theta, int leg, const CpgParams& params) {
  const double x_offset = is_front(leg) ? params.x_offset_front : params.x_offset_hind;
  const double s = std::sin(theta);
  FootTarget t;
  t.leg_index = leg;
  t.x = x_offset - params.step_length * r * std::cos(theta);
  t.z = s > 0.0 ? -params.body_height + params.ground_clearance * s
                : -params.body_height + params.ground_penetration * s;
  return t;
}

std::array<FootTarget, kNumLegs> foot_targets(const OscillatorNetworkState& state,
                                              const CpgParams& params) {
  std::array<FootTarget, kNumLegs> out;
  for (int i = 0; i < kNumLegs; ++i) out[i] = foot_target(state.r[i], state.theta[i], i, params);
  return out;
}

}  // namespace cpgbo
