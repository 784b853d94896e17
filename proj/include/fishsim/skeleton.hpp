#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

#include <json.hpp>

namespace fishsim {

enum class JointKind { Active, Passive };
enum class Variant { SINGLE, FULL };

// One rigid body segment of the chain. Width is the frontal height used as
// drag reference area per unit length; it does not enter the kinematics.
struct LinkSpec {
  std::string name;
  double length = 0.0;  // m
  double mass = 0.0;    // kg
  double width = 0.0;   // m
  double inertia = 0.0; // kg m^2 about the link center
};

inline double slender_rod_inertia(double mass, double length) {
  return mass * length * length / 12.0;
}

inline LinkSpec make_link(std::string name, double length, double mass, double width) {
  LinkSpec l;
  l.name = std::move(name);
  l.length = length;
  l.mass = mass;
  l.width = width;
  l.inertia = slender_rod_inertia(mass, length);
  return l;
}

// Revolute joint between consecutive links. Passive joints carry the
// torsional spring-damper; Active joints are position-driven and ignore
// stiffness/damping.
struct JointSpec {
  std::string name;
  JointKind kind = JointKind::Passive;
  double stiffness = 0.0;  // N m / rad
  double damping = 0.0;    // N m s / rad
  double rest_angle = 0.0; // rad
  double limit = 0.7;      // rad, symmetric bound +-limit
};

// Ordered chain: n+1 links, n joints; joint i connects link i to link i+1.
struct SkeletonSpec {
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  std::vector<int> active;  // ascending indices of the driven joints

  int n_links() const { return static_cast<int>(links.size()); }
  int n_joints() const { return static_cast<int>(joints.size()); }

  double total_length() const {
    double s = 0.0;
    for (const auto& l : links) s += l.length;
    return s;
  }
  double total_mass() const {
    double s = 0.0;
    for (const auto& l : links) s += l.mass;
    return s;
  }

  bool is_active(int joint) const {
    return std::binary_search(active.begin(), active.end(), joint);
  }

  int joint_index(const std::string& name) const {
    for (int j = 0; j < n_joints(); ++j)
      if (joints[j].name == name) return j;
    throw ConfigError("joints", "no joint named '" + name + "'");
  }

  // Throws ConfigError (with field path) on any violated invariant.
  void validate() const {
    if (links.empty()) throw ConfigError("links", "at least one link required");
    if (links.size() != joints.size() + 1)
      throw ConfigError("links", "link/joint count mismatch (" +
                                     std::to_string(links.size()) + " links, " +
                                     std::to_string(joints.size()) + " joints)");
    for (size_t i = 0; i < links.size(); ++i) {
      const std::string path = "links[" + std::to_string(i) + "]";
      const auto& l = links[i];
      if (!(l.length > 0.0)) throw ConfigError(path + ".length", "must be > 0");
      if (!(l.mass > 0.0)) throw ConfigError(path + ".mass", "must be > 0");
      if (!(l.width > 0.0)) throw ConfigError(path + ".width", "must be > 0");
      if (!(l.inertia >= 0.0)) throw ConfigError(path + ".inertia", "must be >= 0");
    }
    for (size_t j = 0; j < joints.size(); ++j) {
      const std::string path = "joints[" + std::to_string(j) + "]";
      const auto& jt = joints[j];
      if (!(jt.limit > 0.0)) throw ConfigError(path + ".limit", "must be > 0");
      if (!(jt.stiffness >= 0.0)) throw ConfigError(path + ".stiffness", "must be >= 0");
      if (!(jt.damping >= 0.0)) throw ConfigError(path + ".damping", "must be >= 0");
      if (!(std::abs(jt.rest_angle) < jt.limit))
        throw ConfigError(path + ".rest_angle", "|rest_angle| must be < limit");
    }
    if (!std::is_sorted(active.begin(), active.end()))
      throw ConfigError("active", "indices must be ascending");
    for (size_t a = 0; a < active.size(); ++a) {
      const std::string path = "active[" + std::to_string(a) + "]";
      const int j = active[a];
      if (j < 0 || j >= n_joints()) throw ConfigError(path, "joint index out of range");
      if (a > 0 && active[a - 1] == j) throw ConfigError(path, "duplicate joint");
      if (joints[j].kind != JointKind::Active)
        throw ConfigError(path, "joint '" + joints[j].name + "' is Passive");
    }
    for (int j = 0; j < n_joints(); ++j)
      if (joints[j].kind == JointKind::Active && !is_active(j))
        throw ConfigError("joints[" + std::to_string(j) + "].kind",
                          "Active joint '" + joints[j].name + "' missing from active list");
  }
};

// Built-in 7-joint koi. Geometry is identical across variants; only the
// actuated set differs (SINGLE: spine03; FULL: spine..spine03).
inline SkeletonSpec default_koi(Variant variant) {
  SkeletonSpec s;
  const double w = 0.05;
  s.links = {
      make_link("head", 0.08, 0.100, w),
      make_link("forebody", 0.06, 0.080, w),
      make_link("body01", 0.05, 0.060, w),
      make_link("body02", 0.05, 0.050, w),
      make_link("body03", 0.05, 0.040, w),
      make_link("body04", 0.05, 0.035, w),
      make_link("peduncle", 0.03, 0.020, w),
      make_link("caudal", 0.03, 0.015, w),
  };
  auto passive = [](std::string name, double k, double c) {
    JointSpec j;
    j.name = std::move(name);
    j.kind = JointKind::Passive;
    j.stiffness = k;
    j.damping = c;
    return j;
  };
  // Stiffness tapers so each joint's natural frequency (against the dry
  // inertia of everything tailward of it) falls from ~5 Hz at the head to
  // ~2.2 Hz at the caudal joint: the anterior stays near-rigid while the
  // tail is resonant inside the 0.5-2.5 Hz gait band, which is what lets a
  // single driven joint shape a tailward traveling wave. Damping is set for
  // a ratio of ~0.5 anterior, ~0.3 in the tail (the fluid adds more).
  s.joints = {
      passive("head", 7.5, 0.24),
      passive("spine", 3.0, 0.11),
      passive("spine01", 1.2, 0.05),
      passive("spine02", 0.4, 0.018),
      passive("spine03", 0.09, 0.004),
      passive("tail_start", 0.01, 4.0e-4),
      passive("tail_end", 9.0e-4, 4.0e-5),
  };
  // The resonant tail swings wider than the body joints; give the fin
  // joints more travel so the wave is not clipped inside the gait band.
  s.joints[5].limit = 1.0;
  s.joints[6].limit = 1.0;
  std::vector<std::string> driven =
      variant == Variant::SINGLE
          ? std::vector<std::string>{"spine03"}
          : std::vector<std::string>{"spine", "spine01", "spine02", "spine03"};
  for (const auto& name : driven) {
    const int j = s.joint_index(name);
    s.joints[j].kind = JointKind::Active;
    s.active.push_back(j);
  }
  std::sort(s.active.begin(), s.active.end());
  s.validate();
  return s;
}

namespace detail {

inline double require_number(const nlohmann::json& node, const std::string& path,
                             const char* key) {
  if (!node.contains(key)) throw ConfigError(path + "." + key, "missing");
  if (!node[key].is_number()) throw ConfigError(path + "." + key, "must be a number");
  return node[key].get<double>();
}

inline std::string require_string(const nlohmann::json& node, const std::string& path,
                                  const char* key) {
  if (!node.contains(key)) throw ConfigError(path + "." + key, "missing");
  if (!node[key].is_string()) throw ConfigError(path + "." + key, "must be a string");
  return node[key].get<std::string>();
}

// Shared by load_skeleton and the full run-config loader.
inline SkeletonSpec skeleton_from_json(const nlohmann::json& root) {
  if (!root.is_object()) throw ConfigError("skeleton config must be a JSON object");
  if (!root.contains("links") || !root["links"].is_array())
    throw ConfigError("links", "missing or not an array");
  if (!root.contains("joints") || !root["joints"].is_array())
    throw ConfigError("joints", "missing or not an array");

  SkeletonSpec s;
  size_t i = 0;
  for (const auto& node : root["links"]) {
    const std::string path = "links[" + std::to_string(i++) + "]";
    LinkSpec l;
    l.name = require_string(node, path, "name");
    l.length = require_number(node, path, "length");
    l.mass = require_number(node, path, "mass");
    l.width = require_number(node, path, "width");
    l.inertia = node.contains("inertia") ? require_number(node, path, "inertia")
                                         : slender_rod_inertia(l.mass, l.length);
    s.links.push_back(std::move(l));
  }
  i = 0;
  for (const auto& node : root["joints"]) {
    const std::string path = "joints[" + std::to_string(i++) + "]";
    JointSpec j;
    j.name = require_string(node, path, "name");
    const std::string kind = require_string(node, path, "kind");
    if (kind == "active")
      j.kind = JointKind::Active;
    else if (kind == "passive")
      j.kind = JointKind::Passive;
    else
      throw ConfigError(path + ".kind", "must be 'active' or 'passive'");
    j.stiffness = node.contains("stiffness") ? require_number(node, path, "stiffness") : 0.0;
    j.damping = node.contains("damping") ? require_number(node, path, "damping") : 0.0;
    j.rest_angle = node.contains("rest_angle") ? require_number(node, path, "rest_angle") : 0.0;
    j.limit = node.contains("limit") ? require_number(node, path, "limit") : 0.7;
    s.joints.push_back(std::move(j));
  }
  if (root.contains("active")) {
    if (!root["active"].is_array()) throw ConfigError("active", "must be an array of joint names");
    i = 0;
    for (const auto& node : root["active"]) {
      const std::string path = "active[" + std::to_string(i++) + "]";
      if (!node.is_string()) throw ConfigError(path, "must be a joint name string");
      s.active.push_back(s.joint_index(node.get<std::string>()));
    }
    std::sort(s.active.begin(), s.active.end());
  } else {
    // Omitted list: every active-kind joint is driven.
    for (int j = 0; j < s.n_joints(); ++j)
      if (s.joints[j].kind == JointKind::Active) s.active.push_back(j);
  }
  s.validate();
  return s;
}

}  // namespace detail

// Parses the documented JSON schema: {links:[{name,length,mass,width[,inertia]}],
// joints:[{name,kind,stiffness,damping,rest_angle,limit}], active:[names]}.
inline SkeletonSpec load_skeleton(const std::string& config_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("skeleton config parse failure: ") + e.what());
  }
  return detail::skeleton_from_json(root);
}

// Link-center poses for a given base (nose anchor) pose and joint angles.
// Link 0's center sits half a length along the base heading; each further
// link hangs off the previous link's distal end, rotated by the cumulative
// joint angles.
inline std::vector<Pose> forward_kinematics(const SkeletonSpec& spec, const Pose& base,
                                            const Eigen::VectorXd& q) {
  if (q.size() != spec.n_joints())
    throw ConfigError("forward_kinematics: expected " + std::to_string(spec.n_joints()) +
                      " joint angles, got " + std::to_string(q.size()));
  for (int j = 0; j < spec.n_joints(); ++j)
    if (std::abs(q[j]) > spec.joints[j].limit)
      throw ConfigError("forward_kinematics: joint '" + spec.joints[j].name +
                        "' angle " + std::to_string(q[j]) + " exceeds limit " +
                        std::to_string(spec.joints[j].limit));

  std::vector<Pose> out(spec.links.size());
  Vec2 anchor = base.position;
  double th = base.angle;
  for (int i = 0; i < spec.n_links(); ++i) {
    if (i > 0) th += q[i - 1];
    const Vec2 u = unit(th);
    out[i].position = anchor + 0.5 * spec.links[i].length * u;
    out[i].angle = th;
    anchor += spec.links[i].length * u;
  }
  return out;
}

}  // namespace fishsim
