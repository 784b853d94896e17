#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "kinematics.hpp"
#include "skeleton.hpp"

namespace fishsim {

// Resistive-force fluid model: independent quadratic drag per link,
// anisotropic between the link axis and its normal.
struct FluidParams {
  double density = 1000.0;     // kg/m^3
  double c_normal = 2.0;       // dimensionless
  double c_tangential = 0.1;   // dimensionless

  // density 0 is allowed as the explicit "dry" mode used by the
  // conservation checks and the drag-free coast runs.
  void validate() const {
    if (!(density >= 0.0)) throw ConfigError("fluid.density", "must be >= 0");
    if (!(c_tangential >= 0.0)) throw ConfigError("fluid.c_tangential", "must be >= 0");
    if (!(c_normal >= c_tangential))
      throw ConfigError("fluid.c_normal", "must be >= c_tangential (anisotropy)");
  }
};

struct Wrench {
  Vec2 force{0.0, 0.0};
  double torque = 0.0;
};

// Quadratic drag on one link. The center velocity is split along the link
// axis (tangential) and its normal; each component sees -1/2 rho c A |v| v
// with A = length*width. Spin about the center is damped by
// -1/2 rho c_n width (length^4/32) |w| w: the length^4/32 factor is the
// strip integral 2*int_0^{l/2} x^2|x| dx of the quadratic normal drag over
// the rod.
inline Wrench link_drag(const Pose& pose, const Vec2& velocity, double omega,
                        const LinkSpec& link, const FluidParams& fluid) {
  if (!velocity.allFinite() || !std::isfinite(omega) || !std::isfinite(pose.angle))
    throw ConfigError("link_drag: non-finite input");
  const Vec2 t = unit(pose.angle);
  const Vec2 n = perp(t);
  const double vt = velocity.dot(t);
  const double vn = velocity.dot(n);
  const double area = link.length * link.width;
  Wrench w;
  w.force = -0.5 * fluid.density * area *
            (fluid.c_tangential * std::abs(vt) * vt * t + fluid.c_normal * std::abs(vn) * vn * n);
  w.torque = -0.5 * fluid.density * fluid.c_normal * link.width *
             (std::pow(link.length, 4) / 32.0) * std::abs(omega) * omega;
  return w;
}

// Per-link wrenches for a whole body state; velocities come from the
// kinematic recursion. Summation order is fixed (head to tail) so results
// are bit-deterministic.
inline std::vector<Wrench> total_fluid_wrench(const SkeletonSpec& spec, const BodyState& state,
                                              const FluidParams& fluid) {
  const LinkStates ls = link_states(spec, state);
  std::vector<Wrench> out(spec.n_links());
  for (int i = 0; i < spec.n_links(); ++i)
    out[i] = link_drag(ls.pose[i], ls.velocity[i], ls.omega[i], spec.links[i], fluid);
  return out;
}

}  // namespace fishsim
