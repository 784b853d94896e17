#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "hydrodynamics.hpp"
#include "kinematics.hpp"
#include "skeleton.hpp"

namespace fishsim {

// Position-drive targets for the active joints, in ascending joint order.
struct ActuationCommand {
  Eigen::VectorXd target_angle;     // rad
  Eigen::VectorXd target_velocity;  // rad/s
};

// Open-loop controller: time -> command. An empty std::function means
// "no actuation": active joints coast as free (undamped, unsprung) joints.
using Controller = std::function<ActuationCommand(double)>;

// Torsional spring-damper law of a compliant joint.
inline double passive_joint_torque(const JointSpec& joint, double angle, double rate) {
  if (joint.kind != JointKind::Passive)
    throw ConfigError("passive_joint_torque: joint '" + joint.name + "' is Active");
  return -joint.stiffness * (angle - joint.rest_angle) - joint.damping * rate;
}

struct TrajectorySample {
  BodyState state;
  Eigen::VectorXd cmd_angle;  // commanded target angles (empty when coasting)
  Vec2 fluid_force{0.0, 0.0}; // net fluid force over all links
  double fluid_power = 0.0;   // total fluid power (<= 0: dissipation)
  Vec2 anchor_force{0.0, 0.0};// base constraint force (anchored mode only)
  double energy_in = 0.0;     // cumulative actuation work up to this sample
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;      // integrator step
  int stride = 1;       // sampling stride: samples at k*stride plus the final step
  double energy_in = 0.0;
  std::string spec_hash;
};

// ---------------------------------------------------------------------------
// Diagnostic-grade generalized-coordinate quantities (allocating, used by the
// tests and the finite-difference cross-check; the Stepper below has a fused
// version of the same math).
// ---------------------------------------------------------------------------

// Full mass matrix over (x, y, theta, q...) in the requested chart,
// M = sum_i (m_i Jt_i^T Jt_i + I_i w_i w_i^T), with w_i the 0/1 angular
// velocity row. Depends only on (theta, q); translation invariant.
inline Eigen::MatrixXd mass_matrix(const SkeletonSpec& spec, double theta,
                                   const Eigen::VectorXd& q, Chart chart) {
  const ChainConstants c = make_constants(spec);
  ChainFrames f;
  compute_frames(c, theta, q, 0.0, Eigen::VectorXd::Zero(c.nj), f);
  const auto J = link_jacobians(c, f, chart);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(c.ny, c.ny);
  Eigen::VectorXd w(c.ny);
  for (int i = 0; i < c.n; ++i) {
    M.noalias() += c.mass[i] * J[i].transpose() * J[i];
    w.setZero();
    w[2] = 1.0;
    for (int j = 0; j < i; ++j) w[3 + j] = 1.0;
    M.noalias() += c.inertia[i] * w * w.transpose();
  }
  return M;
}

// Exact velocity-product (Coriolis/centrifugal) generalized force,
// b = sum_i m_i Jt_i^T (Jtdot_i v). Planar angular rows contribute nothing
// (w_i is constant). v is the full chart velocity (vx, vy, theta_dot, q_dot).
inline Eigen::VectorXd coriolis_bias(const SkeletonSpec& spec, double theta,
                                     const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                     Chart chart) {
  const ChainConstants c = make_constants(spec);
  if (v.size() != c.ny) throw ConfigError("coriolis_bias: velocity dimension mismatch");
  ChainFrames f;
  compute_frames(c, theta, q, v[2], v.tail(c.nj), f);
  const auto J = link_jacobians(c, f, chart);
  std::vector<Vec2> alpha(f.alpha);
  if (chart == Chart::Com) {
    Vec2 abar{0.0, 0.0};
    for (int i = 0; i < c.n; ++i) abar += c.mass[i] * alpha[i];
    abar /= c.total_mass;
    for (auto& a : alpha) a -= abar;
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(c.ny);
  for (int i = 0; i < c.n; ++i) b.noalias() += c.mass[i] * (J[i].transpose() * alpha[i]);
  return b;
}

// The documented reference scheme for the same quantity: Christoffel symbols
// of the first kind from symmetric central differences of the mass matrix,
//   c_kjl = 1/2 (dM_kj/dy_l + dM_kl/dy_j - dM_jl/dy_k),
//   b_k   = sum_jl c_kjl v_j v_l.
// M is translation invariant, so differencing runs only along theta and q.
inline Eigen::VectorXd coriolis_bias_fd(const SkeletonSpec& spec, double theta,
                                        const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                        Chart chart, double h = 1e-5) {
  const int nj = spec.n_joints();
  const int ny = 3 + nj;
  if (v.size() != ny) throw ConfigError("coriolis_bias_fd: velocity dimension mismatch");
  std::vector<Eigen::MatrixXd> dM(ny, Eigen::MatrixXd::Zero(ny, ny));
  for (int k = 2; k < ny; ++k) {
    double thp = theta, thm = theta;
    Eigen::VectorXd qp = q, qm = q;
    if (k == 2) {
      thp += h;
      thm -= h;
    } else {
      qp[k - 3] += h;
      qm[k - 3] -= h;
    }
    dM[k] = (mass_matrix(spec, thp, qp, chart) - mass_matrix(spec, thm, qm, chart)) / (2.0 * h);
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(ny);
  for (int k = 0; k < ny; ++k) {
    double s = 0.0;
    for (int j = 0; j < ny; ++j)
      for (int l = 0; l < ny; ++l)
        s += 0.5 * (dM[l](k, j) + dM[j](k, l) - dM[k](j, l)) * v[j] * v[l];
    b[k] = s;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Time stepping
// ---------------------------------------------------------------------------

struct StepOptions {
  // Freeze all three base coordinates (the paper-rig thrust configuration).
  // The base pose is held and base velocities are zeroed on reset.
  bool anchored = false;
};

// Semi-implicit Euler integrator for the chain.
//
// Free-swimming runs use center-of-mass coordinates z = (com, theta, q): in
// that chart the mass matrix is exactly block-diagonal, the COM obeys
// m_tot * a_com = F_ext with no coupling terms, and linear momentum is
// conserved to the last bit when no external force acts. The (theta, q)
// block is assembled from the anchor-chart Jacobian columns J_ir plus the
// rank-one COM corrections
//   M~(r,s) = M(r,s) - m_tot mu_r . mu_s,   mu_r = sum_i m_i J_ir / m_tot,
// and likewise for the bias and the applied forces.
//
// Active joints are position-driven: their accelerations are implied by the
// commanded rate, the free block is solved with those moved to the
// right-hand side, and the constraint torque is recovered for the energy
// account. Anchored runs work in the plain anchor chart with theta added to
// the driven set.
class Stepper {
 public:
  Stepper(const SkeletonSpec& spec, const FluidParams& fluid, StepOptions opt = {})
      : spec_(spec), fluid_(fluid), opt_(opt), c_(make_constants(spec)) {
    spec_.validate();
    fluid_.validate();
    nr_ = c_.n;  // rot-block coordinates: theta + one per joint
    zr_.setZero(nr_);
    vr_.setZero(nr_);
    inertia_suffix_.assign(c_.n + 1, 0.0);
    for (int i = c_.n - 1; i >= 0; --i)
      inertia_suffix_[i] = inertia_suffix_[i + 1] + c_.inertia[i];
    jcol_.assign(static_cast<size_t>(c_.n) * nr_, Vec2::Zero());
    force_.assign(c_.n, Vec2::Zero());
    torque_.assign(c_.n, 0.0);
    tau_suffix_.assign(c_.n + 1, 0.0);
    mu_.assign(nr_, Vec2::Zero());
    M_.setZero(nr_, nr_);
    b_.setZero(nr_);
    Q_.setZero(nr_);
    a_full_.setZero(nr_);
    mff_.setZero(nr_, nr_);
    rhs_.setZero(nr_);
    free_idx_.reserve(nr_);
    driven_idx_.reserve(nr_);
    vcmd_.reserve(nr_);
  }

  void reset(const BodyState& s) {
    if (s.q.size() != c_.nj || s.q_dot.size() != c_.nj)
      throw ConfigError("Stepper::reset: state dimension does not match skeleton");
    for (int j = 0; j < c_.nj; ++j)
      if (std::abs(s.q[j]) > spec_.joints[j].limit)
        throw ConfigError("Stepper::reset: joint '" + spec_.joints[j].name +
                          "' beyond its limit");
    zr_[0] = s.base.angle;
    zr_.tail(c_.nj) = s.q;
    vr_[0] = s.theta_dot;
    vr_.tail(c_.nj) = s.q_dot;
    if (opt_.anchored) {
      base_pos_ = s.base.position;
      vr_[0] = 0.0;  // base coordinates are frozen in anchored mode
    } else {
      compute_frames(c_, zr_[0], zr_.tail(c_.nj), vr_[0], vr_.tail(c_.nj), f_);
      com_ = s.base.position + com_offset(c_, f_);
      vcom_ = s.base_vel + com_offset_rate(c_, f_);
    }
    t_ = s.t;
    steps_done_ = 0;
    energy_in_ = 0.0;
    fluid_force_.setZero();
    fluid_power_ = 0.0;
    anchor_force_.setZero();
  }

  // Advance one step of size dt. cmd == nullptr coasts the active joints.
  void step(const ActuationCommand* cmd, double dt) {
    if (!(dt > 0.0 && dt <= 0.01))
      throw ConfigError("dt must be in (0, 0.01], got " + std::to_string(dt));
    const int n = c_.n;
    const int na = static_cast<int>(spec_.active.size());
    if (cmd && (cmd->target_angle.size() != na || cmd->target_velocity.size() != na))
      throw ConfigError("ActuationCommand size does not match the active joint set");
    if (cmd)
      for (int a = 0; a < na; ++a)
        if (std::abs(cmd->target_angle[a]) > spec_.joints[spec_.active[a]].limit + 1e-9)
          throw ConfigError("ActuationCommand target for joint '" +
                            spec_.joints[spec_.active[a]].name + "' exceeds its limit");

    compute_frames(c_, zr_[0], zr_.tail(c_.nj), vr_[0], vr_.tail(c_.nj), f_);

    // Fluid loads at current velocities. In the COM chart the base velocity
    // is v_com minus the mass-weighted mean of the relative velocities.
    Vec2 base_vel{0.0, 0.0};
    if (!opt_.anchored) base_vel = vcom_ - com_offset_rate(c_, f_);
    Vec2 fnet{0.0, 0.0};
    double power = 0.0;
    const double rho = fluid_.density;
    for (int i = 0; i < n; ++i) {
      const Vec2 v = base_vel + f_.vrel_center[i];
      const Vec2 t = f_.u[i];
      const Vec2 nrm = perp(t);
      const double vt = v.dot(t);
      const double vn = v.dot(nrm);
      const double om = f_.omega[i];
      Vec2 F = -0.5 * rho * c_.area[i] *
               (fluid_.c_tangential * std::abs(vt) * vt * t +
                fluid_.c_normal * std::abs(vn) * vn * nrm);
      const double tq = -0.5 * rho * fluid_.c_normal * c_.spin_drag[i] * std::abs(om) * om;
      force_[i] = F;
      torque_[i] = tq;
      fnet += F;
      power += F.dot(v) + tq * om;
    }
    fluid_force_ = fnet;
    fluid_power_ = power;

    // Anchor-chart Jacobian columns (column r moves links i >= r about the
    // anchor point rel_anchor[r]), then M, bias, and applied forces over the
    // rot block, with the rank-one COM corrections in free mode.
    Vec2 abar{0.0, 0.0};
    M_.setZero();
    b_.setZero();
    Q_.setZero();
    for (int r = 0; r < nr_; ++r) mu_[r].setZero();
    for (int i = 0; i < n; ++i) {
      const double m = c_.mass[i];
      abar += m * f_.alpha[i];
      for (int r = 0; r <= i; ++r) {
        const Vec2 jc = perp(Vec2(f_.rel_center[i] - f_.rel_anchor[r]));
        jcol_[static_cast<size_t>(i) * nr_ + r] = jc;
        mu_[r] += m * jc;
        b_[r] += m * jc.dot(f_.alpha[i]);
        Q_[r] += jc.dot(force_[i]);
      }
      for (int r = 0; r <= i; ++r) {
        const Vec2& jr = jcol_[static_cast<size_t>(i) * nr_ + r];
        for (int s = 0; s <= r; ++s)
          M_(r, s) += m * jr.dot(jcol_[static_cast<size_t>(i) * nr_ + s]);
      }
    }
    abar /= c_.total_mass;
    for (int r = 0; r < nr_; ++r) mu_[r] /= c_.total_mass;
    if (!opt_.anchored) {
      for (int r = 0; r < nr_; ++r) {
        b_[r] -= c_.total_mass * mu_[r].dot(abar);
        Q_[r] -= mu_[r].dot(fnet);
        for (int s = 0; s <= r; ++s) M_(r, s) -= c_.total_mass * mu_[r].dot(mu_[s]);
      }
    }
    // Angular-row inertia (suffix sums) and pure fluid torques.
    tau_suffix_[n] = 0.0;
    for (int i = n - 1; i >= 0; --i) tau_suffix_[i] = tau_suffix_[i + 1] + torque_[i];
    for (int r = 0; r < nr_; ++r) {
      Q_[r] += tau_suffix_[r];
      for (int s = 0; s <= r; ++s) M_(r, s) += inertia_suffix_[r];
    }
    for (int r = 0; r < nr_; ++r)
      for (int s = 0; s < r; ++s) M_(s, r) = M_(r, s);
    // Passive joint spring-dampers (coasting active joints get no spring).
    // Both act on the end-of-step state: the damper at the new rate, the
    // spring at the new angle. Light tail links put the damping-to-inertia
    // ratio near 1/dt, where old-rate evaluation diverges; and an old-angle
    // spring pumps k/2 (dt q_dot)^2 per step where the new-angle spring
    // dissipates it. Expanding q' = q + dt v' turns both into an effective
    // implicit damper c + dt k on the matrix diagonal.
    for (int j = 0; j < c_.nj; ++j) {
      const JointSpec& jt = spec_.joints[j];
      if (jt.kind == JointKind::Passive) {
        const double c_eff = jt.damping + dt * jt.stiffness;
        Q_[1 + j] += -jt.stiffness * (zr_[1 + j] - jt.rest_angle) - c_eff * vr_[1 + j];
        M_(1 + j, 1 + j) += dt * c_eff;
      }
    }

    // Partition driven vs free rot coordinates.
    free_idx_.clear();
    driven_idx_.clear();
    vcmd_.clear();
    if (opt_.anchored) {
      driven_idx_.push_back(0);
      vcmd_.push_back(0.0);
    } else {
      free_idx_.push_back(0);
    }
    int a = 0;
    for (int j = 0; j < c_.nj; ++j) {
      const bool is_act = a < na && spec_.active[a] == j;
      if (is_act && cmd) {
        driven_idx_.push_back(1 + j);
        vcmd_.push_back(cmd->target_velocity[a]);
      } else {
        free_idx_.push_back(1 + j);
      }
      if (is_act) ++a;
    }
    const int nf = static_cast<int>(free_idx_.size());
    const int nd = static_cast<int>(driven_idx_.size());

    // Implied accelerations of the driven coordinates, then the free solve
    //   M_FF a_F = (Q - b)_F - M_FD a_D.
    for (int d = 0; d < nd; ++d)
      a_full_[driven_idx_[d]] = (vcmd_[d] - vr_[driven_idx_[d]]) / dt;
    if (nf > 0) {
      for (int fi = 0; fi < nf; ++fi) {
        const int r = free_idx_[fi];
        double rhs = Q_[r] - b_[r];
        for (int d = 0; d < nd; ++d) rhs -= M_(r, driven_idx_[d]) * a_full_[driven_idx_[d]];
        rhs_[fi] = rhs;
        for (int fj = 0; fj < nf; ++fj) mff_(fi, fj) = M_(r, free_idx_[fj]);
      }
      ldlt_.compute(mff_.topLeftCorner(nf, nf));
      if (ldlt_.info() != Eigen::Success) {
        const auto d = ldlt_.vectorD();
        const double cond =
            d.cwiseAbs().maxCoeff() / std::max(d.cwiseAbs().minCoeff(), 1e-300);
        throw SimulationError("singular mass matrix (condition estimate " +
                                  std::to_string(cond) + ")",
                              steps_done_);
      }
      Eigen::VectorXd af = ldlt_.solve(rhs_.head(nf));
      if (!af.allFinite())
        throw SimulationError("non-finite dynamics (diverged step)", steps_done_);
      for (int fi = 0; fi < nf; ++fi) a_full_[free_idx_[fi]] = af[fi];
    }

    // Constraint torques on the driven coordinates; actuation work with
    // negative increments clamped (no regeneration).
    anchor_force_.setZero();
    for (int d = 0; d < nd; ++d) {
      const int r = driven_idx_[d];
      double tau = b_[r] - Q_[r];
      for (int s = 0; s < nr_; ++s) tau += M_(r, s) * a_full_[s];
      if (r > 0) {
        const double w = tau * vcmd_[d] * dt;
        if (w > 0.0) energy_in_ += w;
      }
    }
    if (opt_.anchored) {
      Vec2 acc_sum = abar;
      for (int r = 0; r < nr_; ++r) acc_sum += mu_[r] * a_full_[r];
      anchor_force_ = c_.total_mass * acc_sum - fnet;
    }

    // Semi-implicit update: velocities first, then positions; driven
    // coordinates take the commanded rate and target angle directly.
    for (int fi = 0; fi < nf; ++fi) vr_[free_idx_[fi]] += dt * a_full_[free_idx_[fi]];
    for (int d = 0; d < nd; ++d) vr_[driven_idx_[d]] = vcmd_[d];
    if (!opt_.anchored) {
      vcom_ += (dt / c_.total_mass) * fnet;
      com_ += dt * vcom_;
      zr_[0] += dt * vr_[0];
    }
    for (int j = 0; j < c_.nj; ++j) zr_[1 + j] += dt * vr_[1 + j];
    if (cmd) {
      for (int ai = 0; ai < na; ++ai) zr_[1 + spec_.active[ai]] = cmd->target_angle[ai];
    }
    // Joint limits: hard inelastic stops. The position is clamped to the
    // limit and an outward rate is removed by a constraint impulse through
    // the free-block inverse (v -= (v_r / x_r) x with x = M_FF^{-1} e_r).
    // Zeroing the coordinate alone would implicitly kick every other joint
    // and can inject kinetic energy through the off-diagonal inertia; the
    // impulse form dissipates exactly v_r^2 / (2 x_r) and, being an internal
    // torque impulse, leaves linear momentum untouched. Simultaneous stops
    // are handled one joint at a time; any residual outward rate is caught
    // on the next step.
    for (int j = 0; j < c_.nj; ++j) {
      const int r = 1 + j;
      const double lim = spec_.joints[j].limit;
      if (std::abs(zr_[r]) <= lim) continue;
      const double edge = zr_[r] > 0.0 ? lim : -lim;
      zr_[r] = edge;
      const bool outward = edge > 0.0 ? vr_[r] > 0.0 : vr_[r] < 0.0;
      if (!outward) continue;
      int fi = -1;
      for (int k = 0; k < nf; ++k)
        if (free_idx_[k] == r) { fi = k; break; }
      if (fi < 0) {  // driven row: the command owns the rate
        vr_[r] = 0.0;
        continue;
      }
      Eigen::VectorXd er = Eigen::VectorXd::Zero(nf);
      er[fi] = 1.0;
      const Eigen::VectorXd x = ldlt_.solve(er);
      const double scale = vr_[r] / x[fi];
      for (int k = 0; k < nf; ++k) vr_[free_idx_[k]] -= scale * x[k];
      vr_[r] = 0.0;  // exact, not merely to roundoff
    }
    t_ += dt;
    ++steps_done_;
    if (!zr_.allFinite() || !vr_.allFinite() ||
        (!opt_.anchored && (!com_.allFinite() || !vcom_.allFinite())))
      throw SimulationError("non-finite state (diverged step)", steps_done_ - 1);
  }

  BodyState state() const {
    BodyState s;
    s.t = t_;
    s.base.angle = zr_[0];
    s.theta_dot = vr_[0];
    s.q = zr_.tail(c_.nj);
    s.q_dot = vr_.tail(c_.nj);
    if (opt_.anchored) {
      s.base.position = base_pos_;
      s.base_vel.setZero();
    } else {
      ChainFrames f;
      compute_frames(c_, zr_[0], zr_.tail(c_.nj), vr_[0], vr_.tail(c_.nj), f);
      s.base.position = com_ - com_offset(c_, f);
      s.base_vel = vcom_ - com_offset_rate(c_, f);
    }
    return s;
  }

  double energy_in() const { return energy_in_; }
  long steps_done() const { return steps_done_; }
  const Vec2& net_fluid_force() const { return fluid_force_; }
  double fluid_power() const { return fluid_power_; }
  const Vec2& anchor_force() const { return anchor_force_; }
  const SkeletonSpec& spec() const { return spec_; }

 private:
  SkeletonSpec spec_;
  FluidParams fluid_;
  StepOptions opt_;
  ChainConstants c_;
  int nr_ = 0;

  // rot-block state (theta; q) and translation state
  Eigen::VectorXd zr_, vr_;
  Vec2 com_{0.0, 0.0}, vcom_{0.0, 0.0};  // free mode
  Vec2 base_pos_{0.0, 0.0};              // anchored mode
  double t_ = 0.0;
  long steps_done_ = 0;
  double energy_in_ = 0.0;

  // last-step diagnostics
  Vec2 fluid_force_{0.0, 0.0};
  double fluid_power_ = 0.0;
  Vec2 anchor_force_{0.0, 0.0};

  // workspace
  ChainFrames f_;
  std::vector<double> inertia_suffix_, tau_suffix_, torque_;
  std::vector<Vec2> jcol_, force_, mu_;
  Eigen::MatrixXd M_, mff_;
  Eigen::VectorXd b_, Q_, a_full_, rhs_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  std::vector<int> free_idx_, driven_idx_;
  std::vector<double> vcmd_;
};

// Single validated step (the spec-level operation; simulate() keeps a
// persistent Stepper instead of paying the conversion round trip per step).
inline BodyState step(const SkeletonSpec& spec, const BodyState& state,
                      const std::optional<ActuationCommand>& cmd, const FluidParams& fluid,
                      double dt, StepOptions opt = {}) {
  Stepper s(spec, fluid, opt);
  s.reset(state);
  s.step(cmd ? &*cmd : nullptr, dt);
  return s.state();
}

struct SimulateOptions {
  int stride = 1;
  bool anchored = false;
  std::string spec_hash;
};

inline Trajectory simulate(const SkeletonSpec& spec, const BodyState& initial,
                           const Controller& controller, const FluidParams& fluid,
                           double duration, double dt, SimulateOptions opt = {}) {
  if (!(dt > 0.0 && dt <= 0.01))
    throw ConfigError("dt must be in (0, 0.01], got " + std::to_string(dt));
  if (!(duration >= 0.0)) throw ConfigError("duration must be >= 0");
  const long steps = std::lround(duration / dt);
  if (steps > 10'000'000L) throw ConfigError("duration/dt exceeds 1e7 steps");
  const int stride = std::max(1, opt.stride);

  Stepper st(spec, fluid, StepOptions{opt.anchored});
  st.reset(initial);
  const double t0 = initial.t;

  Trajectory traj;
  traj.dt = dt;
  traj.stride = stride;
  traj.spec_hash = opt.spec_hash;
  traj.samples.reserve(static_cast<size_t>(steps / stride) + 2);

  auto record = [&](long k, const ActuationCommand* cmd) {
    TrajectorySample s;
    s.state = st.state();
    s.state.t = t0 + static_cast<double>(k) * dt;
    if (cmd) s.cmd_angle = cmd->target_angle;
    s.fluid_force = st.net_fluid_force();
    s.fluid_power = st.fluid_power();
    s.anchor_force = st.anchor_force();
    s.energy_in = st.energy_in();
    traj.samples.push_back(std::move(s));
  };

  std::optional<ActuationCommand> cmd;
  if (controller) cmd = controller(t0);
  record(0, cmd ? &*cmd : nullptr);
  for (long k = 0; k < steps; ++k) {
    const double t_next = t0 + static_cast<double>(k + 1) * dt;
    if (controller) cmd = controller(t_next);
    st.step(cmd ? &*cmd : nullptr, dt);
    if ((k + 1) % stride == 0 || k + 1 == steps) record(k + 1, cmd ? &*cmd : nullptr);
  }
  traj.energy_in = st.energy_in();
  return traj;
}

}  // namespace fishsim
