#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>
#include <vector>

#include "drivetrain.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "skeleton.hpp"

namespace fishsim {

// CPG-style oscillator parameters, one amplitude/bias/phase entry per active
// joint in ascending joint order. Single-active skeletons carry an implicit
// zero phase (it only rotates the time origin).
struct ControllerParams {
  double frequency = 1.5;    // Hz
  Eigen::VectorXd amplitude; // rad, in [0, limit]
  Eigen::VectorXd bias;      // rad, in [-limit/2, limit/2]
  Eigen::VectorXd phase;     // rad, in [-pi, pi]
};

inline constexpr double kFrequencyMin = 0.2;  // Hz
inline constexpr double kFrequencyMax = 4.0;

inline ControllerParams zero_params(const SkeletonSpec& spec, double frequency = 1.5) {
  ControllerParams p;
  p.frequency = frequency;
  const auto na = static_cast<Eigen::Index>(spec.active.size());
  p.amplitude = Eigen::VectorXd::Zero(na);
  p.bias = Eigen::VectorXd::Zero(na);
  p.phase = Eigen::VectorXd::Zero(na);
  return p;
}

inline void validate_params(const ControllerParams& p, const SkeletonSpec& spec) {
  const auto na = static_cast<Eigen::Index>(spec.active.size());
  if (p.amplitude.size() != na || p.bias.size() != na || p.phase.size() != na)
    throw ConfigError("controller", "parameter sizes do not match the active joint set");
  if (!(p.frequency >= kFrequencyMin && p.frequency <= kFrequencyMax))
    throw ConfigError("controller.frequency", "must be in [0.2, 4] Hz");
  for (Eigen::Index a = 0; a < na; ++a) {
    const JointSpec& j = spec.joints[spec.active[a]];
    const std::string path = "controller[" + j.name + "]";
    if (!(p.amplitude[a] >= 0.0 && p.amplitude[a] <= j.limit))
      throw ConfigError(path + ".amplitude", "must be in [0, limit]");
    if (!(std::abs(p.bias[a]) <= 0.5 * j.limit))
      throw ConfigError(path + ".bias", "must be in [-limit/2, limit/2]");
    if (!(p.amplitude[a] + std::abs(p.bias[a]) <= j.limit))
      throw ConfigError(path, "|bias| + amplitude exceeds the joint limit");
    if (!(std::abs(p.phase[a]) <= kPi)) throw ConfigError(path + ".phase", "must be in [-pi, pi]");
  }
}

// command_a(t) = bias_a + amplitude_a * sin(2 pi f t + phase_a), with the
// analytic rate as the velocity target.
inline Controller make_controller(const SkeletonSpec& spec, const ControllerParams& params) {
  validate_params(params, spec);
  const double w = 2.0 * kPi * params.frequency;
  const Eigen::VectorXd amp = params.amplitude, bias = params.bias, phase = params.phase;
  return [w, amp, bias, phase](double t) {
    ActuationCommand cmd;
    const auto na = amp.size();
    cmd.target_angle.resize(na);
    cmd.target_velocity.resize(na);
    for (Eigen::Index a = 0; a < na; ++a) {
      cmd.target_angle[a] = bias[a] + amp[a] * std::sin(w * t + phase[a]);
      cmd.target_velocity[a] = w * amp[a] * std::cos(w * t + phase[a]);
    }
    return cmd;
  };
}

// Mechanism-in-the-loop controller: the commanded angle is the gear train's
// filtered waveform rescaled to the requested amplitude (the physical knob
// is the drum/lever ratio, which scales the waveform linearly) plus the bias
// offset. Only meaningful for a single active joint. The series is
// precomputed on the simulation grid; velocities are its finite differences.
inline Controller make_gear_controller(const SkeletonSpec& spec, const GearTrainSpec& gear,
                                       const ControllerParams& params, double duration,
                                       double dt) {
  validate_params(params, spec);
  validate_against(gear, spec);
  const double motor_speed = 2.0 * kPi * params.frequency / gear.bevel_ratio;
  std::vector<double> series = joint_angle_series(motor_speed, duration, dt, gear);
  const double peak = peak_amplitude(gear);
  const double scale = params.amplitude[0] / peak;
  const double bias = params.bias[0];
  return [series = std::move(series), scale, bias, dt](double t) {
    const auto n = static_cast<long>(series.size());
    long i = std::lround(t / dt);
    i = std::max(0L, std::min(i, n - 1));
    ActuationCommand cmd;
    cmd.target_angle.resize(1);
    cmd.target_velocity.resize(1);
    cmd.target_angle[0] = bias + scale * series[i];
    cmd.target_velocity[0] = i > 0 ? scale * (series[i] - series[i - 1]) / dt : 0.0;
    return cmd;
  };
}

// Per-parameter [lower, upper] grids used by the discretization utility and
// the optimizer's clamping, in the flat vector order of encode().
struct ParamBounds {
  Eigen::VectorXd lower, upper;
};

// Flat encoding: single active joint -> [frequency, amplitude, bias] (phase
// fixed 0); otherwise [frequency, amplitude..., bias..., phase...].
inline Eigen::Index param_dimension(const SkeletonSpec& spec) {
  const auto na = static_cast<Eigen::Index>(spec.active.size());
  return na == 1 ? 3 : 1 + 3 * na;
}

inline Eigen::VectorXd encode_params(const ControllerParams& p, const SkeletonSpec& spec) {
  const auto na = static_cast<Eigen::Index>(spec.active.size());
  Eigen::VectorXd v(param_dimension(spec));
  v[0] = p.frequency;
  if (na == 1) {
    v[1] = p.amplitude[0];
    v[2] = p.bias[0];
  } else {
    v.segment(1, na) = p.amplitude;
    v.segment(1 + na, na) = p.bias;
    v.segment(1 + 2 * na, na) = p.phase;
  }
  return v;
}

// Decode with clamping to bounds plus the joint-limit repair: amplitude is
// reduced so |bias| + amplitude <= limit always holds (bias <= limit/2
// guarantees feasibility).
inline ControllerParams decode_params(const Eigen::VectorXd& v, const SkeletonSpec& spec) {
  const auto na = static_cast<Eigen::Index>(spec.active.size());
  if (v.size() != param_dimension(spec))
    throw ConfigError("decode_params: expected " + std::to_string(param_dimension(spec)) +
                      " values, got " + std::to_string(v.size()));
  ControllerParams p = zero_params(spec);
  p.frequency = std::clamp(v[0], kFrequencyMin, kFrequencyMax);
  for (Eigen::Index a = 0; a < na; ++a) {
    const double limit = spec.joints[spec.active[a]].limit;
    double amp = na == 1 ? v[1] : v[1 + a];
    double bias = na == 1 ? v[2] : v[1 + na + a];
    double phase = na == 1 ? 0.0 : std::clamp(v[1 + 2 * na + a], -kPi, kPi);
    amp = std::clamp(amp, 0.0, limit);
    bias = std::clamp(bias, -0.5 * limit, 0.5 * limit);
    amp = std::min(amp, limit - std::abs(bias));
    p.amplitude[a] = amp;
    p.bias[a] = bias;
    p.phase[a] = phase;
  }
  return p;
}

inline ParamBounds param_bounds(const SkeletonSpec& spec) {
  const auto na = static_cast<Eigen::Index>(spec.active.size());
  ParamBounds b;
  b.lower.resize(param_dimension(spec));
  b.upper.resize(param_dimension(spec));
  b.lower[0] = kFrequencyMin;
  b.upper[0] = kFrequencyMax;
  for (Eigen::Index a = 0; a < na; ++a) {
    const double limit = spec.joints[spec.active[a]].limit;
    const Eigen::Index ia = na == 1 ? 1 : 1 + a;
    const Eigen::Index ib = na == 1 ? 2 : 1 + na + a;
    b.lower[ia] = 0.0;
    b.upper[ia] = limit;
    b.lower[ib] = -0.5 * limit;
    b.upper[ib] = 0.5 * limit;
    if (na > 1) {
      b.lower[1 + 2 * na + a] = -kPi;
      b.upper[1 + 2 * na + a] = kPi;
    }
  }
  return b;
}

// Snap every parameter to the nearest of `levels` evenly spaced values on
// its bound interval (the DC action-space strategy). Pure grid projection:
// idempotent, no joint-limit repair.
inline ControllerParams discretize(const ControllerParams& p, int levels,
                                   const SkeletonSpec& spec) {
  if (levels < 2) throw ConfigError("discretize: levels must be >= 2");
  const ParamBounds b = param_bounds(spec);
  Eigen::VectorXd v = encode_params(p, spec);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double h = (b.upper[i] - b.lower[i]) / static_cast<double>(levels - 1);
    const double snapped = b.lower[i] + h * std::round((v[i] - b.lower[i]) / h);
    v[i] = std::clamp(snapped, b.lower[i], b.upper[i]);
  }
  // Re-assemble without the decode clamp/repair so the result stays on-grid.
  const auto na = static_cast<Eigen::Index>(spec.active.size());
  ControllerParams out = zero_params(spec);
  out.frequency = v[0];
  if (na == 1) {
    out.amplitude[0] = v[1];
    out.bias[0] = v[2];
  } else {
    out.amplitude = v.segment(1, na);
    out.bias = v.segment(1 + na, na);
    out.phase = v.segment(1 + 2 * na, na);
  }
  return out;
}

// Straight body at rest with the active joints pre-set to the controller's
// t = 0 command (avoids a position jump on the first step).
inline BodyState initial_state(const SkeletonSpec& spec, const Pose& base,
                               const Controller& controller) {
  BodyState s = make_state(spec);
  s.base = base;
  for (int j = 0; j < spec.n_joints(); ++j) s.q[j] = 0.0;
  if (controller) {
    const ActuationCommand cmd = controller(0.0);
    for (size_t a = 0; a < spec.active.size(); ++a) s.q[spec.active[a]] = cmd.target_angle[a];
  }
  return s;
}

}  // namespace fishsim
