#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "skeleton.hpp"

namespace fishsim {

// Single-motor transmission: bevel pair -> two partially shaved spur gears
// alternately driving an idle gear -> cable drum -> active joint angle.
struct GearTrainSpec {
  double bevel_ratio = 1.0;    // spur shaft angle per motor angle
  double duty = 0.8;           // engaged fraction of each half-cycle, (0, 1]
  double idle_ratio = 1.0;     // spur rev : idle rev
  double drum_radius = 0.008;  // m
  double lever_arm = 0.02;     // m, cable attachment offset on the segment
  double smoothing_tau = 0.05; // s, first-order lag for cable compliance

  void validate() const {
    if (!(bevel_ratio > 0.0)) throw ConfigError("geartrain.bevel_ratio", "must be > 0");
    if (!(duty > 0.0 && duty <= 1.0)) throw ConfigError("geartrain.duty", "must be in (0, 1]");
    if (!(idle_ratio > 0.0)) throw ConfigError("geartrain.idle_ratio", "must be > 0");
    if (!(drum_radius > 0.0)) throw ConfigError("geartrain.drum_radius", "must be > 0");
    if (!(lever_arm > 0.0)) throw ConfigError("geartrain.lever_arm", "must be > 0");
    if (!(smoothing_tau >= 0.0)) throw ConfigError("geartrain.smoothing_tau", "must be >= 0");
  }
};

namespace detail {
// Wrap to [0, 2pi).
inline double wrap_2pi(double a) {
  double w = std::fmod(a, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w;
}

// Running integral of idle_direction over one spur cycle starting at 0:
// ramp up during the first engagement window, hold through the dead band,
// ramp back down, hold at zero. Periodic with zero net change per cycle.
inline double idle_integral(double phi, double duty) {
  const double w = wrap_2pi(phi);
  const double e = kPi * duty;  // engaged window length
  if (w < e) return w;
  if (w < kPi) return e;
  if (w < kPi + e) return e - (w - kPi);
  return 0.0;
}
}  // namespace detail

// Rotation sense of the idle gear at a motor angle: +1 while the first spur
// engages, -1 while the opposite one does, 0 in the shaved dead bands.
inline int idle_direction(double motor_angle, const GearTrainSpec& spec) {
  const double phi = detail::wrap_2pi(motor_angle * spec.bevel_ratio);
  const double e = kPi * spec.duty;
  if (phi < e) return 1;
  if (phi < kPi) return 0;
  if (phi < kPi + e) return -1;
  return 0;
}

// Unfiltered joint angle: the idle-gear integral scaled through drum and
// lever, k = drum_radius / (idle_ratio * lever_arm). The phase reference
// puts motor angle 0 at mid-engagement, which makes the waveform odd:
// it starts at 0, peaks k*pi*duty/2 a quarter cycle in, and has exactly
// zero mean over a cycle.
inline double raw_joint_angle(double motor_angle, const GearTrainSpec& spec) {
  const double k = spec.drum_radius / (spec.idle_ratio * spec.lever_arm);
  const double half_window = 0.5 * kPi * spec.duty;
  const double phi = motor_angle * spec.bevel_ratio + half_window;
  return k * (detail::idle_integral(phi, spec.duty) - half_window);
}

inline double peak_amplitude(const GearTrainSpec& spec) {
  return 0.5 * kPi * spec.duty * spec.drum_radius / (spec.idle_ratio * spec.lever_arm);
}

// Waveform period in seconds for a constant motor speed.
inline double waveform_period(double motor_speed, const GearTrainSpec& spec) {
  if (!(motor_speed > 0.0)) throw ConfigError("motor_speed must be > 0");
  return 2.0 * kPi / (spec.bevel_ratio * motor_speed);
}

// raw_joint_angle sampled along motor_angle = motor_speed * t at t = 0..duration,
// then passed through a first-order low-pass (implicit discretization
// y_i = y_{i-1} + dt/(tau+dt) * (x_i - y_{i-1}); tau = 0 is the identity).
inline std::vector<double> joint_angle_series(double motor_speed, double duration, double dt,
                                              const GearTrainSpec& spec) {
  if (!(dt > 0.0)) throw ConfigError("joint_angle_series: dt must be > 0");
  if (!(duration >= 0.0)) throw ConfigError("joint_angle_series: duration must be >= 0");
  const long n = std::lround(duration / dt);
  std::vector<double> y(static_cast<size_t>(n) + 1);
  const double gain = dt / (spec.smoothing_tau + dt);
  for (long i = 0; i <= n; ++i) {
    const double x = raw_joint_angle(motor_speed * static_cast<double>(i) * dt, spec);
    y[i] = i == 0 ? x : y[i - 1] + gain * (x - y[i - 1]);
  }
  return y;
}

// Rejects gear trains whose waveform cannot respect the driven joint's
// limit. The low-pass never amplifies, so the raw peak bounds the command.
inline void validate_against(const GearTrainSpec& gear, const SkeletonSpec& skeleton) {
  gear.validate();
  if (skeleton.active.size() != 1)
    throw ConfigError("geartrain", "gear drive requires exactly one active joint, skeleton has " +
                                       std::to_string(skeleton.active.size()));
  const JointSpec& joint = skeleton.joints[skeleton.active.front()];
  const double peak = peak_amplitude(gear);
  if (peak > joint.limit)
    throw ConfigError("geartrain", "peak amplitude " + std::to_string(peak) +
                                       " exceeds limit " + std::to_string(joint.limit) +
                                       " of joint '" + joint.name + "'");
}

// Single-bin discrete Fourier amplitude of a uniformly sampled series at
// frequency f (amplitude of the cosine/sine pair, i.e. 2|X_f|/N). Sample the
// series over an integer number of periods for a leakage-free value.
inline double fourier_amplitude(const std::vector<double>& series, double dt, double freq) {
  if (series.empty()) throw ConfigError("fourier_amplitude: empty series");
  std::complex<double> acc{0.0, 0.0};
  const size_t n = series.size();
  for (size_t i = 0; i < n; ++i) {
    const double ang = 2.0 * kPi * freq * static_cast<double>(i) * dt;
    acc += series[i] * std::complex<double>(std::cos(ang), -std::sin(ang));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(n);
}

}  // namespace fishsim
