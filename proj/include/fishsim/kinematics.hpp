#pragma once

#include <Eigen/Dense>
#include <vector>

#include "geometry.hpp"
#include "skeleton.hpp"

namespace fishsim {

// Generalized state of the chain: nose-anchor pose plus joint angles, with
// their velocities. q follows the joint order of the SkeletonSpec.
struct BodyState {
  double t = 0.0;
  Pose base;                 // nose anchor pose (x, y, theta)
  Vec2 base_vel{0.0, 0.0};   // m/s
  double theta_dot = 0.0;    // rad/s
  Eigen::VectorXd q;         // rad
  Eigen::VectorXd q_dot;     // rad/s
};

inline BodyState make_state(const SkeletonSpec& spec) {
  BodyState s;
  s.q = Eigen::VectorXd::Zero(spec.n_joints());
  s.q_dot = Eigen::VectorXd::Zero(spec.n_joints());
  return s;
}

// Generalized-coordinate charts. Both share (theta, q); they differ in the
// translation pair: Anchor uses the nose-anchor position, Com the center of
// mass of all links. In the Com chart the mass matrix is exactly
// block-diagonal (translation decouples), which is what lets the integrator
// conserve linear momentum to roundoff.
enum class Chart { Anchor, Com };

// Immutable per-link constants extracted from a SkeletonSpec.
struct ChainConstants {
  int n = 0;   // links
  int nj = 0;  // joints = n - 1
  int ny = 0;  // generalized coordinates = 3 + nj
  std::vector<double> length, half_length, mass, inertia;
  std::vector<double> area;       // length * width, drag reference
  std::vector<double> spin_drag;  // width * length^4 / 32, spin-drag geometry
  double total_mass = 0.0;
};

inline ChainConstants make_constants(const SkeletonSpec& spec) {
  ChainConstants c;
  c.n = spec.n_links();
  c.nj = spec.n_joints();
  c.ny = 3 + c.nj;
  c.length.reserve(c.n);
  for (const auto& l : spec.links) {
    c.length.push_back(l.length);
    c.half_length.push_back(0.5 * l.length);
    c.mass.push_back(l.mass);
    c.inertia.push_back(l.inertia);
    c.area.push_back(l.length * l.width);
    c.spin_drag.push_back(l.width * std::pow(l.length, 4) / 32.0);
    c.total_mass += l.mass;
  }
  return c;
}

// Per-configuration kinematic arrays, positions kept relative to the nose
// anchor so the whole structure is translation invariant. Velocity and
// velocity-product (Jdot*v) recursions share the same pass.
struct ChainFrames {
  std::vector<double> th;        // absolute link angles
  std::vector<double> omega;     // absolute link angular rates
  std::vector<Vec2> u;           // unit(th)
  std::vector<Vec2> rel_anchor;  // n+1 entries, rel_anchor[0] = 0
  std::vector<Vec2> rel_center;  // n entries
  std::vector<Vec2> vrel_center; // center velocity minus base velocity
  std::vector<Vec2> alpha;       // anchor-chart Jdot*v per link center

  void resize(int n) {
    th.resize(n);
    omega.resize(n);
    u.resize(n);
    rel_anchor.resize(n + 1);
    rel_center.resize(n);
    vrel_center.resize(n);
    alpha.resize(n);
  }
};

inline void compute_frames(const ChainConstants& c, double theta,
                           Eigen::Ref<const Eigen::VectorXd> q, double theta_dot,
                           Eigen::Ref<const Eigen::VectorXd> q_dot, ChainFrames& f) {
  f.resize(c.n);
  double th = theta;
  double om = theta_dot;
  Vec2 a{0.0, 0.0};
  Vec2 va{0.0, 0.0};
  Vec2 aa{0.0, 0.0};
  f.rel_anchor[0] = a;
  for (int i = 0; i < c.n; ++i) {
    if (i > 0) {
      th += q[i - 1];
      om += q_dot[i - 1];
    }
    const Vec2 u = unit(th);
    const Vec2 p = perp(u);
    f.th[i] = th;
    f.omega[i] = om;
    f.u[i] = u;
    f.rel_center[i] = a + c.half_length[i] * u;
    f.vrel_center[i] = va + c.half_length[i] * om * p;
    f.alpha[i] = aa - c.half_length[i] * om * om * u;
    a += c.length[i] * u;
    va += c.length[i] * om * p;
    aa -= c.length[i] * om * om * u;
    f.rel_anchor[i + 1] = a;
  }
}

// Anchor-chart translational Jacobian of link i's center: 2 x ny, columns
// ordered (x, y, theta, q_0..). Joint j moves link i only for j < i; its
// column is perp(r_i - joint anchor). The rotational Jacobian row is the 0/1
// prefix pattern [0, 0, 1, 1_{j<i}...] and is applied implicitly elsewhere.
inline void link_jacobian(const ChainFrames& f, int i, Eigen::Ref<Eigen::Matrix2Xd> J) {
  J.setZero();
  J(0, 0) = 1.0;
  J(1, 1) = 1.0;
  const Vec2 r = f.rel_center[i];
  J.col(2) = perp(r);
  for (int j = 0; j < i; ++j) J.col(3 + j) = perp(Vec2(r - f.rel_anchor[j + 1]));
}

// All link Jacobians in the requested chart (allocating, test/diagnostic
// grade). In the Com chart the mass-weighted mean of every (theta, q) column
// is subtracted, so translation columns stay the identity and the column
// mass-means vanish.
inline std::vector<Eigen::Matrix2Xd> link_jacobians(const ChainConstants& c,
                                                    const ChainFrames& f, Chart chart) {
  std::vector<Eigen::Matrix2Xd> J(c.n, Eigen::Matrix2Xd::Zero(2, c.ny));
  for (int i = 0; i < c.n; ++i) link_jacobian(f, i, J[i]);
  if (chart == Chart::Com) {
    for (int k = 2; k < c.ny; ++k) {
      Vec2 mu{0.0, 0.0};
      for (int i = 0; i < c.n; ++i) mu += c.mass[i] * J[i].col(k);
      mu /= c.total_mass;
      for (int i = 0; i < c.n; ++i) J[i].col(k) -= mu;
    }
  }
  return J;
}

// Absolute per-link poses and velocities for a BodyState (used by the fluid
// model and the metrics).
struct LinkStates {
  std::vector<Pose> pose;
  std::vector<Vec2> velocity;
  std::vector<double> omega;
};

inline LinkStates link_states(const SkeletonSpec& spec, const BodyState& state) {
  if (state.q.size() != spec.n_joints() || state.q_dot.size() != spec.n_joints())
    throw ConfigError("link_states: state dimension does not match skeleton");
  const ChainConstants c = make_constants(spec);
  ChainFrames f;
  compute_frames(c, state.base.angle, state.q, state.theta_dot, state.q_dot, f);
  LinkStates out;
  out.pose.resize(c.n);
  out.velocity.resize(c.n);
  out.omega = f.omega;
  for (int i = 0; i < c.n; ++i) {
    out.pose[i].position = state.base.position + f.rel_center[i];
    out.pose[i].angle = f.th[i];
    out.velocity[i] = state.base_vel + f.vrel_center[i];
  }
  return out;
}

// Center of mass of all links, relative to the nose anchor, and its rate.
inline Vec2 com_offset(const ChainConstants& c, const ChainFrames& f) {
  Vec2 s{0.0, 0.0};
  for (int i = 0; i < c.n; ++i) s += c.mass[i] * f.rel_center[i];
  return s / c.total_mass;
}

inline Vec2 com_offset_rate(const ChainConstants& c, const ChainFrames& f) {
  Vec2 s{0.0, 0.0};
  for (int i = 0; i < c.n; ++i) s += c.mass[i] * f.vrel_center[i];
  return s / c.total_mass;
}

}  // namespace fishsim
