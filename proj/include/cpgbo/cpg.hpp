#pragma once

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace cpgbo {

inline constexpr int kNumLegs = 4;

// Leg order used everywhere: Front-Right, Front-Left, Rear-Right, Rear-Left.
enum class Leg : int { kFrontRight = 0, kFrontLeft = 1, kRearRight = 2, kRearLeft = 3 };

inline constexpr bool is_front(int leg) { return leg < 2; }

/// Phase-lag matrix of a trot: diagonal pairs (FR, RL) and (FL, RR) in
/// phase, lateral pairs in anti-phase.
Eigen::Matrix4d trot_coupling();

/// Oscillator network parameters. The first eight fields are the ones the
/// optimizer searches over; the rest are fixed controller constants.
struct CpgParams {
  static constexpr std::size_t kNumOptimized = 8;

  double ground_clearance = 0.08;     // g_c [m]
  double ground_penetration = 0.01;   // g_p [m]
  double omega_swing = 19.5;          // [rad/s]
  double omega_stance = 12.5;         // [rad/s]
  double mu = 1.3;                    // intrinsic amplitude
  double x_offset_front = -0.035;     // [m]
  double x_offset_hind = -0.035;      // [m]
  double sigma_n = 0.175;             // force-feedback coefficient

  double alpha = 50.0;                // amplitude convergence rate [1/s]
  Eigen::Matrix4d coupling_weights = Eigen::Matrix4d::Ones();
  Eigen::Matrix4d phase_lags = trot_coupling();
  double step_length = 0.05;          // d_step [m]
  double body_height = 0.3;           // h [m]

  /// The optimized fields in the canonical order
  /// (g_c, g_p, omega_swing, omega_stance, mu, x_off_front, x_off_hind, sigma_n).
  std::array<double, kNumOptimized> optimized() const;
  void set_optimized(std::span<const double, kNumOptimized> values);

  /// Throws std::invalid_argument if a fixed constant is out of its domain.
  void validate() const;
};

inline constexpr std::array<const char*, CpgParams::kNumOptimized> kOptimizedNames = {
    "g_c", "g_p", "omega_swing", "omega_stance", "mu", "x_offset_front", "x_offset_hind", "sigma_n"};

struct OscillatorNetworkState {
  Eigen::Vector4d r = Eigen::Vector4d::Constant(0.1);
  Eigen::Vector4d theta = Eigen::Vector4d::Zero();

  /// Small amplitudes with phases already in trot relation; FR/RL start in
  /// stance, FL/RR in swing.
  static OscillatorNetworkState trot_start(double amplitude = 0.1);
};

struct FootTarget {
  double x = 0.0;
  double z = 0.0;
  int leg_index = 0;
};

/// Wraps an angle into [0, 2*pi).
double wrap_phase(double angle);

/// Wraps an angle into (-pi, pi].
double wrap_pi(double angle);

/// Intrinsic frequency for a given phase: swing while sin(theta) > 0.
double intrinsic_frequency(double theta, const CpgParams& params);

/// Time derivatives (rdot, thetadot) of the network. Passing sigma_n = 0 or
/// zero forces gives the open-loop dynamics.
void network_derivatives(const OscillatorNetworkState& state, const CpgParams& params,
                         const Eigen::Vector4d& normal_forces, Eigen::Vector4d& r_dot,
                         Eigen::Vector4d& theta_dot);

/// One explicit Euler step of the amplitude/phase dynamics with force
/// feedback. Amplitudes are clamped at zero and phases wrapped into
/// [0, 2*pi). Throws std::invalid_argument on non-finite input or dt <= 0.
OscillatorNetworkState step_network(const OscillatorNetworkState& state, const CpgParams& params,
                                    const Eigen::Vector4d& normal_forces, double dt);

/// Cartesian foot targets in each hip frame (x forward, z up).
std::array<FootTarget, kNumLegs> foot_targets(const OscillatorNetworkState& state,
                                              const CpgParams& params);

FootTarget foot_target(double r, double theta, int leg, const CpgParams& params);

}  // namespace cpgbo
