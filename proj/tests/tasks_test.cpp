#include "fishsim/tasks.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fishsim;

namespace {

TrajectorySample at(double t, const Vec2& pos, double angle = 0.0,
                    double energy = 0.0) {
  TrajectorySample s;
  s.state.t = t;
  s.state.base.position = pos;
  s.state.base.angle = angle;
  s.state.q = Eigen::VectorXd();
  s.state.q_dot = Eigen::VectorXd();
  s.energy_in = energy;
  return s;
}

Trajectory line_run(const std::vector<TrajectorySample>& samples) {
  Trajectory t;
  t.samples = samples;
  t.dt = 1e-3;
  return t;
}

TEST(Tasks, CrossTrackErrorExamples) {
  const std::vector<Vec2> path = {Vec2(0, 0), Vec2(2, 0)};
  EXPECT_DOUBLE_EQ(cross_track_error(Vec2(1, 0), path), 0.0);   // on the path
  EXPECT_DOUBLE_EQ(cross_track_error(Vec2(0, 1), path), 1.0);   // one meter off
  EXPECT_DOUBLE_EQ(cross_track_error(Vec2(3, 0), path), 1.0);   // past the end
  EXPECT_DOUBLE_EQ(cross_track_error(Vec2(-1, -1), path), std::sqrt(2.0));

  // Nearest of several segments wins.
  const std::vector<Vec2> bend = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1)};
  EXPECT_NEAR(cross_track_error(Vec2(0.9, 0.5), bend), 0.1, 1e-15);
  EXPECT_THROW(cross_track_error(Vec2(0, 0), {Vec2(0, 0)}), ConfigError);
}

TEST(Tasks, HeadingErrorWrapping) {
  EXPECT_DOUBLE_EQ(heading_error(1.5 * kPi, 0.0), -0.5 * kPi);
  EXPECT_NEAR(heading_error(0.1, 0.3), -0.2, 1e-15);
  // Antipodal headings report +pi from either side, never -pi.
  EXPECT_DOUBLE_EQ(heading_error(0.3 + kPi, 0.3), kPi);
  EXPECT_DOUBLE_EQ(heading_error(0.3 - kPi, 0.3), kPi);
  EXPECT_DOUBLE_EQ(heading_error(2.0 * kPi, 0.0), 0.0);
}

TEST(Tasks, CostOfTransportExamples) {
  // 0.4 J spent moving a 0.4 kg body 0.5 m: CoT = 0.4 / (0.4 * 9.81 * 0.5).
  Trajectory t = line_run({at(0.0, Vec2(0, 0)), at(1.0, Vec2(0.5, 0), 0.0, 0.4)});
  const auto cot = cost_of_transport(t, 0.4);
  ASSERT_TRUE(cot.has_value());
  EXPECT_NEAR(*cot, 0.2039, 1e-4);

  // Coasting costs nothing.
  Trajectory coast = line_run({at(0.0, Vec2(0, 0)), at(1.0, Vec2(0.5, 0))});
  EXPECT_DOUBLE_EQ(*cost_of_transport(coast, 0.4), 0.0);

  // No displacement: undefined, reported absent.
  Trajectory still = line_run({at(0.0, Vec2(1, 2)), at(1.0, Vec2(1, 2), 0.0, 0.4)});
  EXPECT_FALSE(cost_of_transport(still, 0.4).has_value());

  EXPECT_THROW(cost_of_transport(Trajectory{}, 0.4), ConfigError);
}

TEST(Tasks, EvaluateCruise) {
  TaskSpec task;
  task.task = CruiseTask{Vec2(1, 0), 0.05};
  Trajectory t = line_run({at(0.0, Vec2(0, 0)), at(0.5, Vec2(0.5, 0), 0.0, 0.1),
                           at(1.0, Vec2(0.98, 0), 0.0, 0.2)});
  const MetricsReport m = evaluate(t, task, 0.4);
  ASSERT_TRUE(m.time_to_target.has_value());
  EXPECT_DOUBLE_EQ(*m.time_to_target, 1.0);  // first sample within tolerance
  ASSERT_TRUE(m.cost_of_transport.has_value());
  EXPECT_NEAR(*m.cost_of_transport, 0.2 / (0.4 * 9.81 * 0.98), 1e-12);
  EXPECT_NEAR(m.net_displacement, 0.98, 1e-15);
  EXPECT_FALSE(m.mean_cte.has_value());
  EXPECT_FALSE(m.final_heading_error.has_value());

  // Starting inside the tolerance ball: target reached at t = 0.
  Trajectory parked = line_run({at(0.0, Vec2(1, 0)), at(1.0, Vec2(1, 0))});
  EXPECT_DOUBLE_EQ(*evaluate(parked, task, 0.4).time_to_target, 0.0);

  // Never reaching it: absent.
  Trajectory shy = line_run({at(0.0, Vec2(0, 0)), at(1.0, Vec2(0.5, 0))});
  EXPECT_FALSE(evaluate(shy, task, 0.4).time_to_target.has_value());
}

TEST(Tasks, EvaluatePathFollowAndPose) {
  TaskSpec path_task;
  path_task.task = PathFollowTask{{Vec2(0, 0), Vec2(2, 0)}};
  Trajectory t = line_run({at(0.0, Vec2(0, 0.2)), at(0.5, Vec2(1, -0.1)),
                           at(1.0, Vec2(2, 0.3))});
  const MetricsReport m = evaluate(t, path_task, 0.4);
  ASSERT_TRUE(m.mean_cte.has_value());
  EXPECT_NEAR(*m.mean_cte, (0.2 + 0.1 + 0.3) / 3.0, 1e-15);
  EXPECT_NEAR(*m.max_cte, 0.3, 1e-15);
  EXPECT_GE(*m.max_cte, *m.mean_cte);

  TaskSpec pose_task;
  pose_task.task = PoseControlTask{0.3};
  Trajectory p = line_run({at(0.0, Vec2(0, 0), 0.0), at(1.0, Vec2(0, 0), 0.3 + kPi)});
  const MetricsReport pm = evaluate(p, pose_task, 0.4);
  ASSERT_TRUE(pm.final_heading_error.has_value());
  EXPECT_DOUBLE_EQ(*pm.final_heading_error, kPi);
}

TEST(Tasks, EvaluateRejectsDtMismatch) {
  TaskSpec task;
  task.task = CruiseTask{};
  task.dt = 5e-4;
  Trajectory t = line_run({at(0.0, Vec2(0, 0))});  // dt = 1e-3
  EXPECT_THROW(evaluate(t, task, 0.4), ConfigError);
}

TEST(Tasks, RewardOptimaAreZero) {
  // Cruise: finish on target with zero displacement-free energy.
  TaskSpec cruise;
  cruise.task = CruiseTask{Vec2(1, 0), 0.05};
  Trajectory ct = line_run({at(0.0, Vec2(0, 0)), at(1.0, Vec2(1, 0))});
  EXPECT_DOUBLE_EQ(reward(ct, cruise, 0.4), 0.0);

  // PathFollow: ride the line exactly.
  TaskSpec path;
  path.task = PathFollowTask{{Vec2(0, 0), Vec2(2, 0)}};
  Trajectory pt = line_run({at(0.0, Vec2(0, 0)), at(1.0, Vec2(1.5, 0))});
  EXPECT_DOUBLE_EQ(reward(pt, path, 0.4), 0.0);

  // PoseControl: hit the heading without moving a joint.
  TaskSpec pose;
  pose.task = PoseControlTask{0.7};
  Trajectory ot = line_run({at(0.0, Vec2(0, 0), 0.2), at(1.0, Vec2(0, 0), 0.7)});
  EXPECT_DOUBLE_EQ(reward(ot, pose, 0.4), 0.0);
}

TEST(Tasks, RewardComposition) {
  // Cruise: -distance - 0.1 * CoT.
  TaskSpec cruise;
  cruise.task = CruiseTask{Vec2(1, 0), 0.05};
  Trajectory ct = line_run({at(0.0, Vec2(0, 0)), at(1.0, Vec2(0.5, 0), 0.0, 0.4)});
  const double cot = 0.4 / (0.4 * 9.81 * 0.5);
  EXPECT_NEAR(reward(ct, cruise, 0.4), -0.5 - 0.1 * cot, 1e-12);

  // PathFollow: minus the mean cross-track error over all samples.
  TaskSpec path;
  path.task = PathFollowTask{{Vec2(0, 0), Vec2(2, 0)}};
  Trajectory pt = line_run({at(0.0, Vec2(0, 0.2)), at(1.0, Vec2(1, 0.1))});
  EXPECT_NEAR(reward(pt, path, 0.4), -0.15, 1e-15);

  // PoseControl: a quarter-turn error with frozen joints scores -pi/4.
  TaskSpec pose;
  pose.task = PoseControlTask{0.0};
  Trajectory ot = line_run({at(0.0, Vec2(0, 0), 0.0), at(1.0, Vec2(0, 0), kPi / 4)});
  EXPECT_DOUBLE_EQ(reward(ot, pose, 0.4), -kPi / 4);

  // ... and pays 0.01 per rad/s of mean joint speed.
  Trajectory busy = ot;
  for (auto& s : busy.samples) s.state.q_dot = Eigen::VectorXd::Constant(7, 1.0);
  EXPECT_NEAR(reward(busy, pose, 0.4), -kPi / 4 - 0.01, 1e-12);
}

TEST(Tasks, PathMetricsTranslationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec2 shift(3.7, -2.1);
  std::vector<Vec2> wp = {Vec2(0, 0), Vec2(1, 0.5), Vec2(2, 0)};
  std::vector<Vec2> wp_shift;
  for (const Vec2& w : wp) wp_shift.push_back(w + shift);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p(u(rng) * 3, u(rng));
    EXPECT_NEAR(cross_track_error(p, wp), cross_track_error(p + shift, wp_shift),
                1e-12);
  }
}

TEST(Tasks, TaskSpecValidation) {
  TaskSpec t;
  t.task = CruiseTask{};
  EXPECT_NO_THROW(t.validate());
  t.duration = 0.0;
  EXPECT_THROW(t.validate(), ConfigError);
  t.duration = 10.0;
  t.dt = 0.02;
  EXPECT_THROW(t.validate(), ConfigError);
  t.dt = 1e-3;
  t.task = CruiseTask{Vec2(1, 0), 0.0};
  EXPECT_THROW(t.validate(), ConfigError);
  t.task = PathFollowTask{{Vec2(0, 0)}};
  EXPECT_THROW(t.validate(), ConfigError);
  t.task = PathFollowTask{{Vec2(0, 0), Vec2(0, 0)}};
  EXPECT_THROW(t.validate(), ConfigError);
  t.task = PoseControlTask{0.5};
  EXPECT_NO_THROW(t.validate());
}

}  // namespace
