#pragma once

// Run configuration: a single JSON document that resolves to everything a run
// needs (skeleton, fluid, drivetrain, task, optimizer, controller, sweep and
// output plumbing). Missing sections fall back to the koi defaults, so `{}`
// is a complete config. Dotted-path overrides ("fluid.density=0") edit the
// document before resolution; flags are applied the same way so there is one
// resolution path no matter where a value came from.
//
// The fully resolved document is kept on the RunConfig and hashed (FNV-1a of
// the canonical dump); the hash is stamped into every artifact so outputs can
// be traced back to the exact inputs that produced them.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fishsim/controller.hpp"
#include "fishsim/drivetrain.hpp"
#include "fishsim/errors.hpp"
#include "fishsim/geometry.hpp"
#include "fishsim/hydrodynamics.hpp"
#include "fishsim/optimizer.hpp"
#include "fishsim/skeleton.hpp"
#include "fishsim/tasks.hpp"

namespace fishsim {

inline constexpr int kSchemaVersion = 1;

// Frequency grid and measurement windows for the thrust sweep.
struct SweepConfig {
  double freq_min = 0.5;       // Hz, first grid point
  double freq_max = 2.5;       // Hz, last grid point
  int steps = 5;               // grid points, inclusive of both ends
  double amplitude = 0.3;      // rad, tail command amplitude
  double settle_time = 2.0;    // s, minimum transient discarded (>= 2 cycles)
  double measure_cycles = 4.0; // cycles averaged after settling

  void validate() const {
    if (!(freq_min > 0.0)) throw ConfigError("sweep.freq_min", "must be > 0");
    if (!(freq_max >= freq_min))
      throw ConfigError("sweep.freq_max", "must be >= freq_min");
    if (steps < 1) throw ConfigError("sweep.steps", "must be >= 1");
    if (steps == 1 && freq_max != freq_min)
      throw ConfigError("sweep.steps",
                        "a single step requires freq_min == freq_max");
    if (!(amplitude > 0.0)) throw ConfigError("sweep.amplitude", "must be > 0");
    if (!(settle_time >= 0.0))
      throw ConfigError("sweep.settle_time", "must be >= 0");
    if (!(measure_cycles > 0.0))
      throw ConfigError("sweep.measure_cycles", "must be > 0");
  }
};

struct RunConfig {
  Variant variant = Variant::SINGLE;
  SkeletonSpec skeleton;
  FluidParams fluid;
  GearTrainSpec geartrain;
  TaskSpec task;
  OptimizerConfig optimizer;
  std::optional<ControllerParams> controller;  // explicit open-loop gait
  std::string controller_file;                 // or load best_params from a training result
  SweepConfig sweep;

  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int sample_stride = 1;
  DriveMode drive = DriveMode::Sine;
  bool anchored = false;
  Pose initial_base{Vec2(0.0, 0.0), kPi};
  Vec2 initial_vel{0.0, 0.0};

  nlohmann::json resolved;  // canonical document after defaults + overrides
  std::string spec_hash;    // FNV-1a of resolved.dump() minus output_dir
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

// Rethrows ConfigError with a section prefix so errors read
// "fluid.density: must be >= 0" instead of losing the section.
template <class Fn>
auto prefixed(const std::string& section, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(section + "." + e.what());
  }
}

inline double get_number(const nlohmann::json& j, const std::string& key,
                         double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ConfigError(key, "must be a number");
  return j.at(key).get<double>();
}

inline bool get_bool(const nlohmann::json& j, const std::string& key,
                     bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(key, "must be a boolean");
  return j.at(key).get<bool>();
}

inline std::uint64_t get_seed(const nlohmann::json& j, const std::string& key,
                              std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const nlohmann::json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0)
    return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(key, "must be a non-negative integer");
}

inline std::string get_string(const nlohmann::json& j, const std::string& key,
                              const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(key, "must be a string");
  return j.at(key).get<std::string>();
}

inline Eigen::VectorXd get_vector(const nlohmann::json& j,
                                  const std::string& key) {
  if (!j.contains(key)) return Eigen::VectorXd();
  const nlohmann::json& a = j.at(key);
  if (!a.is_array()) throw ConfigError(key, "must be an array of numbers");
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw ConfigError(key, "must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

// Accepts either a scalar (broadcast over the active joints) or an array of
// exactly `n` entries.
inline Eigen::VectorXd get_broadcast(const nlohmann::json& j,
                                     const std::string& key, int n,
                                     double fallback) {
  if (!j.contains(key)) return Eigen::VectorXd::Constant(n, fallback);
  const nlohmann::json& a = j.at(key);
  if (a.is_number()) return Eigen::VectorXd::Constant(n, a.get<double>());
  if (a.is_array()) {
    Eigen::VectorXd v = get_vector(j, key);
    if (v.size() != n)
      throw ConfigError(key, "needs one entry per active joint (" +
                                 std::to_string(n) + ")");
    return v;
  }
  throw ConfigError(key, "must be a number or an array");
}

inline FluidParams fluid_from_json(const nlohmann::json& j) {
  FluidParams p;
  p.density = get_number(j, "density", p.density);
  p.c_normal = get_number(j, "c_normal", p.c_normal);
  p.c_tangential = get_number(j, "c_tangential", p.c_tangential);
  p.validate();
  return p;
}

inline GearTrainSpec geartrain_from_json(const nlohmann::json& j) {
  GearTrainSpec g;
  g.bevel_ratio = get_number(j, "bevel_ratio", g.bevel_ratio);
  g.duty = get_number(j, "duty", g.duty);
  g.idle_ratio = get_number(j, "idle_ratio", g.idle_ratio);
  g.drum_radius = get_number(j, "drum_radius", g.drum_radius);
  g.lever_arm = get_number(j, "lever_arm", g.lever_arm);
  g.smoothing_tau = get_number(j, "smoothing_tau", g.smoothing_tau);
  g.validate();
  return g;
}

inline TaskSpec task_from_json(const nlohmann::json& j) {
  TaskSpec spec;
  const std::string type = get_string(j, "type", "cruise");
  if (type == "cruise") {
    CruiseTask t;
    if (j.contains("target")) {
      const nlohmann::json& a = j.at("target");
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() ||
          !a[1].is_number())
        throw ConfigError("target", "must be [x, y]");
      t.target = Vec2(a[0].get<double>(), a[1].get<double>());
    }
    t.tolerance = get_number(j, "tolerance", t.tolerance);
    spec.task = t;
  } else if (type == "path_follow") {
    PathFollowTask t;
    if (!j.contains("waypoints"))
      throw ConfigError("waypoints", "required for path_follow");
    const nlohmann::json& a = j.at("waypoints");
    if (!a.is_array()) throw ConfigError("waypoints", "must be an array of [x, y]");
    for (const nlohmann::json& w : a) {
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() ||
          !w[1].is_number())
        throw ConfigError("waypoints", "must be an array of [x, y]");
      t.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>());
    }
    spec.task = t;
  } else if (type == "pose_control") {
    PoseControlTask t;
    t.target_heading = get_number(j, "target_heading", t.target_heading);
    spec.task = t;
  } else {
    throw ConfigError("type", "unknown task '" + type +
                                  "' (cruise, path_follow, pose_control)");
  }
  spec.duration = get_number(j, "duration", spec.duration);
  spec.dt = get_number(j, "dt", spec.dt);
  spec.validate();
  return spec;
}

inline OptimizerConfig optimizer_from_json(const nlohmann::json& j,
                                           std::uint64_t default_seed) {
  OptimizerConfig c;
  c.population = static_cast<int>(get_number(j, "population", c.population));
  c.elite_fraction = get_number(j, "elite_fraction", c.elite_fraction);
  c.iterations = static_cast<int>(get_number(j, "iterations", c.iterations));
  c.seed = get_seed(j, "seed", default_seed);
  c.init_mean = get_vector(j, "init_mean");
  c.init_std = get_vector(j, "init_std");
  c.min_std = get_vector(j, "min_std");
  c.lower = get_vector(j, "lower");
  c.upper = get_vector(j, "upper");
  // Dimension-dependent checks happen in optimize(); only scalar sanity here.
  if (c.population < 4) throw ConfigError("population", "must be >= 4");
  if (!(c.elite_fraction > 0.0 && c.elite_fraction < 1.0))
    throw ConfigError("elite_fraction", "must be in (0, 1)");
  if (c.iterations < 0) throw ConfigError("iterations", "must be >= 0");
  return c;
}

inline ControllerParams controller_from_json(const nlohmann::json& j,
                                             const SkeletonSpec& spec) {
  const int na = static_cast<int>(spec.active.size());
  ControllerParams p;
  p.frequency = get_number(j, "frequency", 1.5);
  p.amplitude = get_broadcast(j, "amplitude", na, 0.3);
  p.bias = get_broadcast(j, "bias", na, 0.0);
  p.phase = get_broadcast(j, "phase", na, 0.0);
  validate_params(p, spec);
  return p;
}

inline SweepConfig sweep_from_json(const nlohmann::json& j) {
  SweepConfig s;
  s.freq_min = get_number(j, "freq_min", s.freq_min);
  s.freq_max = get_number(j, "freq_max", s.freq_max);
  s.steps = static_cast<int>(get_number(j, "steps", s.steps));
  s.amplitude = get_number(j, "amplitude", s.amplitude);
  s.settle_time = get_number(j, "settle_time", s.settle_time);
  s.measure_cycles = get_number(j, "measure_cycles", s.measure_cycles);
  s.validate();
  return s;
}

inline nlohmann::json skeleton_to_json(const SkeletonSpec& spec) {
  nlohmann::json j;
  j["links"] = nlohmann::json::array();
  for (const LinkSpec& l : spec.links)
    j["links"].push_back({{"name", l.name},
                          {"length", l.length},
                          {"mass", l.mass},
                          {"width", l.width},
                          {"inertia", l.inertia}});
  j["joints"] = nlohmann::json::array();
  for (const JointSpec& jt : spec.joints)
    j["joints"].push_back(
        {{"name", jt.name},
         {"kind", jt.kind == JointKind::Active ? "active" : "passive"},
         {"stiffness", jt.stiffness},
         {"damping", jt.damping},
         {"rest_angle", jt.rest_angle},
         {"limit", jt.limit}});
  j["active"] = nlohmann::json::array();
  for (const int a : spec.active) j["active"].push_back(spec.joints[a].name);
  return j;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline nlohmann::json params_to_json(const ControllerParams& p) {
  return {{"frequency", p.frequency},
          {"amplitude", vector_to_json(p.amplitude)},
          {"bias", vector_to_json(p.bias)},
          {"phase", vector_to_json(p.phase)}};
}

inline nlohmann::json task_to_json(const TaskSpec& spec) {
  nlohmann::json j;
  if (const auto* c = std::get_if<CruiseTask>(&spec.task)) {
    j["type"] = "cruise";
    j["target"] = {c->target.x(), c->target.y()};
    j["tolerance"] = c->tolerance;
  } else if (const auto* p = std::get_if<PathFollowTask>(&spec.task)) {
    j["type"] = "path_follow";
    j["waypoints"] = nlohmann::json::array();
    for (const Vec2& w : p->waypoints) j["waypoints"].push_back({w.x(), w.y()});
  } else {
    const auto& t = std::get<PoseControlTask>(spec.task);
    j["type"] = "pose_control";
    j["target_heading"] = t.target_heading;
  }
  j["duration"] = spec.duration;
  j["dt"] = spec.dt;
  return j;
}

inline nlohmann::json resolved_to_json(const RunConfig& rc) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["variant"] = rc.variant == Variant::SINGLE ? "single" : "full";
  j["skeleton"] = skeleton_to_json(rc.skeleton);
  j["fluid"] = {{"density", rc.fluid.density},
                {"c_normal", rc.fluid.c_normal},
                {"c_tangential", rc.fluid.c_tangential}};
  j["geartrain"] = {{"bevel_ratio", rc.geartrain.bevel_ratio},
                    {"duty", rc.geartrain.duty},
                    {"idle_ratio", rc.geartrain.idle_ratio},
                    {"drum_radius", rc.geartrain.drum_radius},
                    {"lever_arm", rc.geartrain.lever_arm},
                    {"smoothing_tau", rc.geartrain.smoothing_tau}};
  j["task"] = task_to_json(rc.task);
  nlohmann::json opt = {{"population", rc.optimizer.population},
                        {"elite_fraction", rc.optimizer.elite_fraction},
                        {"iterations", rc.optimizer.iterations},
                        {"seed", rc.optimizer.seed}};
  if (rc.optimizer.init_mean.size() > 0)
    opt["init_mean"] = vector_to_json(rc.optimizer.init_mean);
  if (rc.optimizer.init_std.size() > 0)
    opt["init_std"] = vector_to_json(rc.optimizer.init_std);
  if (rc.optimizer.min_std.size() > 0)
    opt["min_std"] = vector_to_json(rc.optimizer.min_std);
  if (rc.optimizer.lower.size() > 0)
    opt["lower"] = vector_to_json(rc.optimizer.lower);
  if (rc.optimizer.upper.size() > 0)
    opt["upper"] = vector_to_json(rc.optimizer.upper);
  j["optimizer"] = opt;
  if (rc.controller) j["controller"] = params_to_json(*rc.controller);
  if (!rc.controller_file.empty()) j["controller_file"] = rc.controller_file;
  j["sweep"] = {{"freq_min", rc.sweep.freq_min},
                {"freq_max", rc.sweep.freq_max},
                {"steps", rc.sweep.steps},
                {"amplitude", rc.sweep.amplitude},
                {"settle_time", rc.sweep.settle_time},
                {"measure_cycles", rc.sweep.measure_cycles}};
  j["output_dir"] = rc.output_dir;
  j["seed"] = rc.seed;
  j["sample_stride"] = rc.sample_stride;
  j["drive"] = rc.drive == DriveMode::Sine ? "sine" : "gear";
  j["anchored"] = rc.anchored;
  j["initial"] = {{"x", rc.initial_base.position.x()},
                  {"y", rc.initial_base.position.y()},
                  {"theta", rc.initial_base.angle},
                  {"vx", rc.initial_vel.x()},
                  {"vy", rc.initial_vel.y()}};
  return j;
}

}  // namespace detail

// Applies one "dotted.path=value" override to the document. The value is
// parsed as JSON when possible (numbers, booleans, arrays, quoted strings)
// and treated as a bare string otherwise. Numeric path segments index into
// arrays.
inline void apply_override(nlohmann::json& root, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like KEY=VALUE");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty())
      throw ConfigError("override '" + assignment + "' has an empty path segment");
    parts.push_back(part);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;  // bare string, e.g. --override drive=gear
  }

  nlohmann::json* node = &root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const std::string& part = parts[i];
    if (node->is_array()) {
      const int idx = std::atoi(part.c_str());
      if (idx < 0 || static_cast<std::size_t>(idx) >= node->size())
        throw ConfigError("override '" + assignment + "': index " + part +
                          " out of range");
      node = &((*node)[static_cast<std::size_t>(idx)]);
    } else {
      node = &((*node)[part]);
    }
  }
  if (node->is_array()) {
    const int idx = std::atoi(parts.back().c_str());
    if (idx < 0 || static_cast<std::size_t>(idx) >= node->size())
      throw ConfigError("override '" + assignment + "': index " + parts.back() +
                        " out of range");
    (*node)[static_cast<std::size_t>(idx)] = value;
  } else {
    (*node)[parts.back()] = value;
  }
}

// Resolves a config document (already parsed) plus overrides into a RunConfig.
inline RunConfig resolve_config(nlohmann::json doc,
                                const std::vector<std::string>& overrides = {}) {
  if (doc.is_null()) doc = nlohmann::json::object();
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  for (const std::string& o : overrides) apply_override(doc, o);

  RunConfig rc;
  const std::string variant = detail::get_string(doc, "variant", "single");
  if (variant == "single") {
    rc.variant = Variant::SINGLE;
  } else if (variant == "full") {
    rc.variant = Variant::FULL;
  } else {
    throw ConfigError("variant", "must be 'single' or 'full'");
  }

  if (doc.contains("skeleton")) {
    rc.skeleton = detail::prefixed("skeleton", [&] {
      return detail::skeleton_from_json(doc.at("skeleton"));
    });
  } else {
    rc.skeleton = default_koi(rc.variant);
  }

  rc.fluid = detail::prefixed("fluid", [&] {
    return detail::fluid_from_json(doc.value("fluid", nlohmann::json::object()));
  });
  rc.geartrain = detail::prefixed("geartrain", [&] {
    return detail::geartrain_from_json(
        doc.value("geartrain", nlohmann::json::object()));
  });
  rc.task = detail::prefixed("task", [&] {
    return detail::task_from_json(doc.value("task", nlohmann::json::object()));
  });

  rc.seed = detail::get_seed(doc, "seed", 0);
  rc.optimizer = detail::prefixed("optimizer", [&] {
    return detail::optimizer_from_json(
        doc.value("optimizer", nlohmann::json::object()), rc.seed);
  });

  if (doc.contains("controller")) {
    rc.controller = detail::prefixed("controller", [&] {
      return detail::controller_from_json(doc.at("controller"), rc.skeleton);
    });
  }
  rc.controller_file = detail::get_string(doc, "controller_file", "");

  rc.sweep = detail::sweep_from_json(doc.value("sweep", nlohmann::json::object()));

  rc.output_dir = detail::get_string(doc, "output_dir", rc.output_dir);
  rc.sample_stride =
      static_cast<int>(detail::get_number(doc, "sample_stride", 1.0));
  if (rc.sample_stride < 1)
    throw ConfigError("sample_stride", "must be >= 1");

  const std::string drive = detail::get_string(doc, "drive", "sine");
  if (drive == "sine") {
    rc.drive = DriveMode::Sine;
  } else if (drive == "gear") {
    rc.drive = DriveMode::Gear;
  } else {
    throw ConfigError("drive", "must be 'sine' or 'gear'");
  }
  if (rc.drive == DriveMode::Gear && rc.skeleton.active.size() != 1)
    throw ConfigError("drive",
                      "gear drive needs exactly one active joint (variant single)");

  rc.anchored = detail::get_bool(doc, "anchored", false);

  if (doc.contains("initial")) {
    const nlohmann::json& init = doc.at("initial");
    if (!init.is_object()) throw ConfigError("initial", "must be an object");
    rc.initial_base.position.x() = detail::get_number(init, "x", 0.0);
    rc.initial_base.position.y() = detail::get_number(init, "y", 0.0);
    rc.initial_base.angle = detail::get_number(init, "theta", kPi);
    rc.initial_vel.x() = detail::get_number(init, "vx", 0.0);
    rc.initial_vel.y() = detail::get_number(init, "vy", 0.0);
  }

  rc.resolved = detail::resolved_to_json(rc);
  // The hash identifies the physical run, so where artifacts land is
  // excluded: the same spec written to two directories is the same run.
  nlohmann::json hashed = rc.resolved;
  hashed.erase("output_dir");
  rc.spec_hash = detail::hash_hex(hashed.dump());
  return rc;
}

inline nlohmann::json parse_config_text(const std::string& text) {
  try {
    return text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
}

// Parses config text (or "{}" for empty) and resolves it.
inline RunConfig load_config(const std::string& text,
                             const std::vector<std::string>& overrides = {}) {
  return resolve_config(parse_config_text(text), overrides);
}

}  // namespace fishsim
