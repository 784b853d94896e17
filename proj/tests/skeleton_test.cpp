#include "fishsim/skeleton.hpp"

#include <gtest/gtest.h>

#include <random>

#include "fishsim/geometry.hpp"

using namespace fishsim;

namespace {

SkeletonSpec two_link() {
  SkeletonSpec s;
  s.links = {make_link("a", 0.1, 0.2, 0.05), make_link("b", 0.05, 0.1, 0.04)};
  JointSpec j;
  j.name = "mid";
  j.kind = JointKind::Active;
  j.limit = 2.0;  // wide enough for the right-angle hand-value pose
  s.joints = {j};
  s.active = {0};
  return s;
}

TEST(Skeleton, SlenderRodInertia) {
  // I = m L^2 / 12 for a thin rod about its center.
  EXPECT_DOUBLE_EQ(slender_rod_inertia(0.3, 0.2), 0.3 * 0.04 / 12.0);
  EXPECT_DOUBLE_EQ(make_link("x", 0.2, 0.3, 0.05).inertia, 0.3 * 0.04 / 12.0);
}

TEST(Skeleton, DefaultKoiSingle) {
  const SkeletonSpec s = default_koi(Variant::SINGLE);
  s.validate();
  EXPECT_EQ(s.n_links(), 8);
  EXPECT_EQ(s.n_joints(), 7);
  EXPECT_NEAR(s.total_mass(), 0.4, 1e-12);
  EXPECT_NEAR(s.total_length(), 0.40, 1e-12);
  ASSERT_EQ(s.active.size(), 1u);
  EXPECT_EQ(s.joints[s.active[0]].name, "spine03");
  EXPECT_EQ(s.joints[s.active[0]].kind, JointKind::Active);
  // Everything else is compliant.
  int passive = 0;
  for (const JointSpec& j : s.joints)
    if (j.kind == JointKind::Passive) {
      ++passive;
      EXPECT_GT(j.stiffness, 0.0);
      EXPECT_GT(j.damping, 0.0);
    }
  EXPECT_EQ(passive, 6);
}

TEST(Skeleton, DefaultKoiFull) {
  const SkeletonSpec s = default_koi(Variant::FULL);
  s.validate();
  ASSERT_EQ(s.active.size(), 4u);
  EXPECT_EQ(s.joints[s.active[0]].name, "spine");
  EXPECT_EQ(s.joints[s.active[3]].name, "spine03");
  for (int a : s.active) EXPECT_EQ(s.joints[a].kind, JointKind::Active);
}

TEST(Skeleton, ValidateCountMismatch) {
  SkeletonSpec s = two_link();
  s.joints.clear();
  s.active.clear();
  try {
    s.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("link/joint count mismatch"),
              std::string::npos)
        << e.what();
  }
}

TEST(Skeleton, ValidatePositivityAndLimits) {
  SkeletonSpec s = two_link();
  s.links[0].mass = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);

  s = two_link();
  s.joints[0].rest_angle = 2.5;  // beyond the joint limit
  EXPECT_THROW(s.validate(), ConfigError);

  s = two_link();
  s.joints[0].limit = -0.1;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Skeleton, ValidateActiveList) {
  // Active list referencing a Passive-kind joint.
  SkeletonSpec s = two_link();
  s.joints[0].kind = JointKind::Passive;
  try {
    s.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("is Passive"), std::string::npos);
  }

  // Active-kind joint missing from the active list.
  s = two_link();
  s.active.clear();
  EXPECT_THROW(s.validate(), ConfigError);

  // Out-of-range index.
  s = two_link();
  s.active = {3};
  EXPECT_THROW(s.validate(), ConfigError);

  // Duplicates.
  s = two_link();
  s.active = {0, 0};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Skeleton, LoadFromJson) {
  const std::string text = R"({
    "links": [
      {"name": "a", "length": 0.1, "mass": 0.2, "width": 0.05},
      {"name": "b", "length": 0.05, "mass": 0.1, "width": 0.04}
    ],
    "joints": [
      {"name": "mid", "kind": "active", "stiffness": 0.0, "damping": 0.0}
    ],
    "active": ["mid"]
  })";
  const SkeletonSpec s = load_skeleton(text);
  EXPECT_EQ(s.n_links(), 2);
  EXPECT_EQ(s.joints[0].limit, 0.7);  // default
  EXPECT_EQ(s.active, std::vector<int>{0});
  // Inertia defaults to the slender-rod value.
  EXPECT_DOUBLE_EQ(s.links[0].inertia, slender_rod_inertia(0.2, 0.1));
}

TEST(Skeleton, LoadParseFailure) {
  try {
    load_skeleton("{ not json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("parse failure"), std::string::npos);
  }
}

TEST(Skeleton, LoadRejectsUnknownKind) {
  const std::string text = R"({
    "links": [
      {"name": "a", "length": 0.1, "mass": 0.2, "width": 0.05},
      {"name": "b", "length": 0.05, "mass": 0.1, "width": 0.04}
    ],
    "joints": [{"name": "mid", "kind": "hydraulic"}],
    "active": []
  })";
  EXPECT_THROW(load_skeleton(text), ConfigError);
}

TEST(ForwardKinematics, TwoLinkHandValues) {
  const SkeletonSpec s = two_link();
  Pose base;
  base.position = Vec2(0.0, 0.0);
  base.angle = 0.0;
  Eigen::VectorXd q(1);
  q << kPi / 2.0;
  const std::vector<Pose> poses = forward_kinematics(s, base, q);
  ASSERT_EQ(poses.size(), 2u);
  // Link 0: centered half a length ahead of the base along the heading.
  EXPECT_NEAR(poses[0].position.x(), 0.05, 1e-15);
  EXPECT_NEAR(poses[0].position.y(), 0.0, 1e-15);
  EXPECT_NEAR(poses[0].angle, 0.0, 1e-15);
  // Link 1: hinged at (0.1, 0), turned 90 degrees.
  EXPECT_NEAR(poses[1].position.x(), 0.1, 1e-15);
  EXPECT_NEAR(poses[1].position.y(), 0.025, 1e-15);
  EXPECT_NEAR(poses[1].angle, kPi / 2.0, 1e-15);
}

TEST(ForwardKinematics, RigidityAndEquivariance) {
  const SkeletonSpec s = default_koi(Variant::SINGLE);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> limit(-0.6, 0.6);
  std::uniform_real_distribution<double> span(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd q(s.n_joints());
    for (int j = 0; j < s.n_joints(); ++j)
      q[j] = limit(rng) * s.joints[j].limit / 0.7;
    Pose base{Vec2(span(rng), span(rng)), span(rng)};
    const auto poses = forward_kinematics(s, base, q);

    // Rigidity: consecutive hinge distances equal the link length.
    Vec2 anchor = base.position;
    for (int i = 0; i < s.n_links(); ++i) {
      const Vec2 u = unit(poses[i].angle);
      EXPECT_NEAR((poses[i].position - (anchor + 0.5 * s.links[i].length * u)).norm(),
                  0.0, 1e-12);
      anchor += s.links[i].length * u;
    }

    // Equivariance: transforming the base transforms every link pose.
    const double dth = span(rng);
    const Vec2 dp(span(rng), span(rng));
    Pose moved;
    const double c = std::cos(dth), sn = std::sin(dth);
    moved.position =
        Vec2(c * base.position.x() - sn * base.position.y() + dp.x(),
             sn * base.position.x() + c * base.position.y() + dp.y());
    moved.angle = base.angle + dth;
    const auto poses2 = forward_kinematics(s, moved, q);
    for (int i = 0; i < s.n_links(); ++i) {
      const Vec2 expect(
          c * poses[i].position.x() - sn * poses[i].position.y() + dp.x(),
          sn * poses[i].position.x() + c * poses[i].position.y() + dp.y());
      EXPECT_NEAR((poses2[i].position - expect).norm(), 0.0, 1e-12);
      EXPECT_NEAR(poses2[i].angle, poses[i].angle + dth, 1e-12);
    }
  }
}

TEST(ForwardKinematics, DimensionAndLimitChecks) {
  const SkeletonSpec s = two_link();
  Pose base;
  Eigen::VectorXd wrong(2);
  wrong.setZero();
  EXPECT_THROW(forward_kinematics(s, base, wrong), ConfigError);
  Eigen::VectorXd beyond(1);
  beyond << 2.1;
  EXPECT_THROW(forward_kinematics(s, base, beyond), ConfigError);
}

}  // namespace
