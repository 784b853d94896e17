#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

namespace fishsim {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

// Planar rigid pose: position of a reference point plus orientation.
struct Pose {
  Vec2 position{0.0, 0.0};
  double angle = 0.0;
};

// Unit vector at angle a.
inline Vec2 unit(double a) { return Vec2(std::cos(a), std::sin(a)); }

// 90-degree counter-clockwise rotation; perp(u(a)) == u(a + pi/2).
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// Wrap to (-pi, pi]. std::remainder yields [-pi, pi]; the -pi edge is
// folded to +pi so the representative is unique.
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w = kPi;
  return w;
}

}  // namespace fishsim
