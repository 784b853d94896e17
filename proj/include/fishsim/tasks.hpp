#pragma once

#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace fishsim {

struct CruiseTask {
  Vec2 target{1.0, 0.0};
  double tolerance = 0.05;  // m
};

struct PathFollowTask {
  std::vector<Vec2> waypoints;
};

struct PoseControlTask {
  double target_heading = 0.0;  // rad, base orientation target
};

struct TaskSpec {
  std::variant<CruiseTask, PathFollowTask, PoseControlTask> task;
  double duration = 10.0;  // s
  double dt = 1e-3;        // s

  void validate() const {
    if (!(duration > 0.0)) throw ConfigError("task.duration", "must be > 0");
    if (!(dt > 0.0 && dt <= 0.01)) throw ConfigError("task.dt", "must be in (0, 0.01]");
    if (const auto* c = std::get_if<CruiseTask>(&task)) {
      if (!(c->tolerance > 0.0)) throw ConfigError("task.tolerance", "must be > 0");
    } else if (const auto* p = std::get_if<PathFollowTask>(&task)) {
      if (p->waypoints.size() < 2) throw ConfigError("task.waypoints", "need at least 2");
      for (size_t i = 1; i < p->waypoints.size(); ++i)
        if ((p->waypoints[i] - p->waypoints[i - 1]).norm() == 0.0)
          throw ConfigError("task.waypoints[" + std::to_string(i) + "]",
                            "consecutive waypoints must be distinct");
    }
  }
};

struct MetricsReport {
  std::optional<double> time_to_target;       // s, Cruise
  std::optional<double> cost_of_transport;    // dimensionless, Cruise
  std::optional<double> mean_cte;             // m, PathFollow
  std::optional<double> max_cte;              // m, PathFollow
  std::optional<double> final_heading_error;  // rad in (-pi, pi], PoseControl
  double net_displacement = 0.0;              // m, all tasks
};

// Minimum distance from p to the waypoint polyline (projection clamped to
// each segment, so points beyond an end see the end vertex).
inline double cross_track_error(const Vec2& p, const std::vector<Vec2>& waypoints) {
  if (waypoints.size() < 2) throw ConfigError("cross_track_error: need at least 2 waypoints");
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec2 a = waypoints[i];
    const Vec2 d = waypoints[i + 1] - a;
    const double len2 = d.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (a + s * d)).norm());
  }
  return best;
}

// Signed wrapped difference theta - target in (-pi, pi]; antipodal headings
// report +pi, never -pi.
inline double heading_error(double theta, double target) {
  return wrap_angle(theta - target);
}

// energy_in / (m g d) with d the straight-line start->end distance of the
// base. Zero displacement has no defined value and reports absent.
inline std::optional<double> cost_of_transport(const Trajectory& traj, double total_mass,
                                               double g = 9.81) {
  if (traj.samples.empty()) throw ConfigError("cost_of_transport: empty trajectory");
  const double d =
      (traj.samples.back().state.base.position - traj.samples.front().state.base.position)
          .norm();
  if (!(d > 0.0)) return std::nullopt;
  return traj.samples.back().energy_in / (total_mass * g * d);
}

// Fills the fields applicable to the task variant; net_displacement always.
// total_mass feeds the cost-of-transport denominator.
inline MetricsReport evaluate(const Trajectory& traj, const TaskSpec& task, double total_mass,
                              double g = 9.81) {
  if (traj.samples.empty()) throw ConfigError("evaluate: empty trajectory");
  if (traj.dt != task.dt)
    throw ConfigError("evaluate: trajectory/task dt mismatch (" + std::to_string(traj.dt) +
                      " vs " + std::to_string(task.dt) + ")");
  MetricsReport r;
  const Vec2 p0 = traj.samples.front().state.base.position;
  const Vec2 p1 = traj.samples.back().state.base.position;
  r.net_displacement = (p1 - p0).norm();
  if (const auto* c = std::get_if<CruiseTask>(&task.task)) {
    for (const auto& s : traj.samples)
      if ((s.state.base.position - c->target).norm() <= c->tolerance) {
        r.time_to_target = s.state.t - traj.samples.front().state.t;
        break;
      }
    r.cost_of_transport = cost_of_transport(traj, total_mass, g);
  } else if (const auto* p = std::get_if<PathFollowTask>(&task.task)) {
    double sum = 0.0, mx = 0.0;
    for (const auto& s : traj.samples) {
      const double e = cross_track_error(s.state.base.position, p->waypoints);
      sum += e;
      mx = std::max(mx, e);
    }
    r.mean_cte = sum / static_cast<double>(traj.samples.size());
    r.max_cte = mx;
  } else if (const auto* pc = std::get_if<PoseControlTask>(&task.task)) {
    r.final_heading_error = heading_error(traj.samples.back().state.base.angle,
                                          pc->target_heading);
  }
  return r;
}

// Scalar objective for the optimizer; maximum 0 at each task's ideal
// outcome. The shaping constants (0.1 energy, 0.01 effort) are fixed so
// training runs stay comparable.
inline double reward(const Trajectory& traj, const TaskSpec& task, double total_mass,
                     double g = 9.81) {
  if (traj.samples.empty()) throw ConfigError("reward: empty trajectory");
  if (const auto* c = std::get_if<CruiseTask>(&task.task)) {
    const double dist = (traj.samples.back().state.base.position - c->target).norm();
    const auto cot = cost_of_transport(traj, total_mass, g);
    return -dist - 0.1 * cot.value_or(0.0);
  }
  if (const auto* p = std::get_if<PathFollowTask>(&task.task)) {
    double sum = 0.0;
    for (const auto& s : traj.samples)
      sum += cross_track_error(s.state.base.position, p->waypoints);
    return -sum / static_cast<double>(traj.samples.size());
  }
  const auto& pc = std::get<PoseControlTask>(task.task);
  const double he = heading_error(traj.samples.back().state.base.angle, pc.target_heading);
  double effort = 0.0;
  long count = 0;
  for (const auto& s : traj.samples) {
    effort += s.state.q_dot.cwiseAbs().sum();
    count += s.state.q_dot.size();
  }
  return -std::abs(he) - 0.01 * (count > 0 ? effort / static_cast<double>(count) : 0.0);
}

}  // namespace fishsim
