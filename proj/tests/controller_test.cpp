#include "fishsim/controller.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fishsim;

namespace {

SkeletonSpec narrow_limit_skeleton() {
  SkeletonSpec s;
  s.links = {make_link("a", 0.1, 0.05, 0.03), make_link("b", 0.1, 0.05, 0.03)};
  JointSpec j;
  j.name = "drive";
  j.kind = JointKind::Active;
  j.limit = 0.6;
  s.joints = {j};
  s.active = {0};
  return s;
}

TEST(Controller, SineCommandValues) {
  const SkeletonSpec s = default_koi(Variant::SINGLE);
  ControllerParams p = zero_params(s, 1.0);
  p.amplitude[0] = 0.3;
  const Controller ctrl = make_controller(s, p);
  // A quarter period into a 1 Hz stroke the sine tops out at the amplitude.
  EXPECT_NEAR(ctrl(0.25).target_angle[0], 0.3, 1e-12);
  EXPECT_NEAR(ctrl(0.0).target_angle[0], 0.0, 1e-12);
  EXPECT_NEAR(ctrl(0.5).target_angle[0], 0.0, 1e-12);
  EXPECT_NEAR(ctrl(0.75).target_angle[0], -0.3, 1e-12);
  // Velocity is the analytic derivative.
  EXPECT_NEAR(ctrl(0.0).target_velocity[0], 2.0 * kPi * 0.3, 1e-12);
  EXPECT_NEAR(ctrl(0.25).target_velocity[0], 0.0, 1e-12);

  ControllerParams shifted = p;
  shifted.bias[0] = 0.1;
  shifted.phase[0] = 0.5 * kPi;
  const Controller c2 = make_controller(s, shifted);
  EXPECT_NEAR(c2(0.0).target_angle[0], 0.4, 1e-12);
}

TEST(Controller, VelocityMatchesFiniteDifference) {
  const SkeletonSpec s = default_koi(Variant::FULL);
  ControllerParams p = zero_params(s, 2.2);
  for (int a = 0; a < 4; ++a) {
    p.amplitude[a] = 0.1 + 0.05 * a;
    p.bias[a] = 0.02 * a;
    p.phase[a] = -0.3 * a;
  }
  const Controller ctrl = make_controller(s, p);
  const double h = 1e-7;
  for (double t : {0.1, 0.37, 1.9}) {
    const Eigen::VectorXd fd =
        (ctrl(t + h).target_angle - ctrl(t - h).target_angle) / (2.0 * h);
    EXPECT_NEAR((ctrl(t).target_velocity - fd).norm(), 0.0, 1e-5);
  }
}

TEST(Controller, ValidateParams) {
  const SkeletonSpec s = default_koi(Variant::SINGLE);
  ControllerParams p = zero_params(s);
  EXPECT_NO_THROW(validate_params(p, s));

  p.frequency = 0.1;  // below kFrequencyMin
  EXPECT_THROW(validate_params(p, s), ConfigError);
  p.frequency = 5.0;
  EXPECT_THROW(validate_params(p, s), ConfigError);

  p = zero_params(s);
  p.amplitude[0] = 0.8;  // above the 0.7 limit
  EXPECT_THROW(validate_params(p, s), ConfigError);
  p = zero_params(s);
  p.amplitude[0] = -0.1;
  EXPECT_THROW(validate_params(p, s), ConfigError);
  p = zero_params(s);
  p.bias[0] = 0.4;  // above limit/2
  EXPECT_THROW(validate_params(p, s), ConfigError);
  p = zero_params(s);
  p.amplitude[0] = 0.5;
  p.bias[0] = 0.3;  // sum exceeds the limit
  EXPECT_THROW(validate_params(p, s), ConfigError);
  p = zero_params(s);
  p.phase[0] = 4.0;
  EXPECT_THROW(validate_params(p, s), ConfigError);
  p = zero_params(s);
  p.amplitude = Eigen::VectorXd::Zero(2);  // wrong dimension
  EXPECT_THROW(validate_params(p, s), ConfigError);
}

TEST(Controller, ParamDimensionAndBounds) {
  const SkeletonSpec single = default_koi(Variant::SINGLE);
  const SkeletonSpec full = default_koi(Variant::FULL);
  EXPECT_EQ(param_dimension(single), 3);
  EXPECT_EQ(param_dimension(full), 13);

  const ParamBounds b = param_bounds(single);
  EXPECT_DOUBLE_EQ(b.lower[0], 0.2);
  EXPECT_DOUBLE_EQ(b.upper[0], 4.0);
  EXPECT_DOUBLE_EQ(b.lower[1], 0.0);
  EXPECT_DOUBLE_EQ(b.upper[1], 0.7);
  EXPECT_DOUBLE_EQ(b.lower[2], -0.35);
  EXPECT_DOUBLE_EQ(b.upper[2], 0.35);

  const ParamBounds bf = param_bounds(full);
  ASSERT_EQ(bf.lower.size(), 13);
  EXPECT_DOUBLE_EQ(bf.upper[4], 0.7);    // last amplitude
  EXPECT_DOUBLE_EQ(bf.lower[5], -0.35);  // first bias
  EXPECT_DOUBLE_EQ(bf.upper[12], kPi);   // last phase
}

TEST(Controller, EncodeDecodeRoundTrip) {
  for (const Variant variant : {Variant::SINGLE, Variant::FULL}) {
    const SkeletonSpec s = default_koi(variant);
    ControllerParams p = zero_params(s, 2.5);
    for (Eigen::Index a = 0; a < p.amplitude.size(); ++a) {
      p.amplitude[a] = 0.2 + 0.05 * static_cast<double>(a);
      p.bias[a] = -0.1 + 0.04 * static_cast<double>(a);
      if (variant == Variant::FULL) p.phase[a] = 0.3 * static_cast<double>(a);
    }
    const Eigen::VectorXd v = encode_params(p, s);
    ASSERT_EQ(v.size(), param_dimension(s));
    const ControllerParams q = decode_params(v, s);
    EXPECT_DOUBLE_EQ(q.frequency, p.frequency);
    EXPECT_NEAR((q.amplitude - p.amplitude).norm(), 0.0, 1e-15);
    EXPECT_NEAR((q.bias - p.bias).norm(), 0.0, 1e-15);
    EXPECT_NEAR((q.phase - p.phase).norm(), 0.0, 1e-15);
  }
}

TEST(Controller, DecodeClampsAndRepairs) {
  const SkeletonSpec s = default_koi(Variant::SINGLE);
  Eigen::VectorXd v(3);
  v << 9.0, 1.5, -2.0;  // everything out of range
  const ControllerParams p = decode_params(v, s);
  EXPECT_DOUBLE_EQ(p.frequency, 4.0);
  EXPECT_DOUBLE_EQ(p.bias[0], -0.35);
  // Amplitude first clamps to the limit, then shrinks so bias+amp fits.
  EXPECT_DOUBLE_EQ(p.amplitude[0], 0.7 - 0.35);
  EXPECT_NO_THROW(validate_params(p, s));

  Eigen::VectorXd wrong(4);
  wrong.setZero();
  EXPECT_THROW(decode_params(wrong, s), ConfigError);

  // Any finite vector decodes to a valid parameter set.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd r(3);
    r << u(rng), u(rng), u(rng);
    EXPECT_NO_THROW(validate_params(decode_params(r, s), s));
  }
}

TEST(Controller, DiscretizeSnapsToGrid) {
  const SkeletonSpec s = narrow_limit_skeleton();
  ControllerParams p = zero_params(s, 1.5);
  p.amplitude[0] = 0.29;
  // Four levels on [0, 0.6] puts the grid at {0, 0.2, 0.4, 0.6}; 0.29 is
  // nearer 0.2 than 0.4.
  const ControllerParams d = discretize(p, 4, s);
  EXPECT_NEAR(d.amplitude[0], 0.2, 1e-12);

  // Idempotent: a snapped value stays put.
  const ControllerParams dd = discretize(d, 4, s);
  EXPECT_DOUBLE_EQ(dd.amplitude[0], d.amplitude[0]);
  EXPECT_DOUBLE_EQ(dd.frequency, d.frequency);
  EXPECT_DOUBLE_EQ(dd.bias[0], d.bias[0]);

  // The snap moves a value at most half a grid spacing.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 0.6);
  for (int trial = 0; trial < 50; ++trial) {
    ControllerParams r = zero_params(s);
    r.amplitude[0] = u(rng);
    const ControllerParams g = discretize(r, 7, s);
    EXPECT_LE(std::abs(g.amplitude[0] - r.amplitude[0]), 0.5 * 0.6 / 6.0 + 1e-12);
  }

  EXPECT_THROW(discretize(p, 1, s), ConfigError);
}

TEST(Controller, InitialStatePresetsActiveJoints) {
  const SkeletonSpec s = default_koi(Variant::SINGLE);
  ControllerParams p = zero_params(s, 1.0);
  p.amplitude[0] = 0.2;
  p.bias[0] = 0.1;
  p.phase[0] = 0.5 * kPi;
  const Controller ctrl = make_controller(s, p);
  const BodyState st = initial_state(s, Pose{Vec2(1, 2), 0.3}, ctrl);
  EXPECT_DOUBLE_EQ(st.base.position.x(), 1.0);
  EXPECT_DOUBLE_EQ(st.base.angle, 0.3);
  EXPECT_NEAR(st.q[s.active[0]], 0.3, 1e-12);  // bias + amp * sin(pi/2)
  for (int j = 0; j < s.n_joints(); ++j) {
    if (j != s.active[0]) {
      EXPECT_DOUBLE_EQ(st.q[j], 0.0);
    }
  }
  EXPECT_DOUBLE_EQ(st.base_vel.norm(), 0.0);

  // Coasting: straight body.
  const BodyState coast = initial_state(s, Pose{Vec2(0, 0), 0.0}, Controller());
  EXPECT_DOUBLE_EQ(coast.q.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Controller, GearControllerWaveform) {
  const SkeletonSpec s = default_koi(Variant::SINGLE);
  GearTrainSpec gear;  // stock geometry
  gear.smoothing_tau = 0.0;
  ControllerParams p = zero_params(s, 1.0);
  p.amplitude[0] = 0.3;
  p.bias[0] = 0.1;
  const double dt = 1e-3;
  const Controller ctrl = make_gear_controller(s, gear, p, 2.0, dt);

  // Amplitude rescale: the waveform plateau a quarter cycle in reaches
  // exactly bias + amplitude regardless of the drum/lever geometry.
  EXPECT_NEAR(ctrl(0.25).target_angle[0], 0.4, 1e-12);
  EXPECT_NEAR(ctrl(0.0).target_angle[0], 0.1, 1e-12);
  EXPECT_NEAR(ctrl(0.75).target_angle[0], -0.2, 1e-12);

  // Velocity is the backward difference of the sampled waveform.
  const double a1 = ctrl(0.100).target_angle[0];
  const double a0 = ctrl(0.099).target_angle[0];
  EXPECT_NEAR(ctrl(0.100).target_velocity[0], (a1 - a0) / dt, 1e-9);
  EXPECT_DOUBLE_EQ(ctrl(0.0).target_velocity[0], 0.0);

  // Past the precomputed range the command holds the last sample.
  EXPECT_DOUBLE_EQ(ctrl(5.0).target_angle[0], ctrl(2.0).target_angle[0]);

  // Gear drive needs a single active joint.
  EXPECT_THROW(
      make_gear_controller(default_koi(Variant::FULL), gear, zero_params(default_koi(Variant::FULL)), 1.0, dt),
      ConfigError);
}

}  // namespace
