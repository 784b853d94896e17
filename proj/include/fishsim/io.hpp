#pragma once

// Artifact writers. Every number that lands in a text file goes through the
// same "%.9g" formatter so reruns of the same (config, seed, build) are
// byte-identical and diffs stay readable. Files carry schema_version and the
// config hash so a stray CSV can always be traced to its inputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fishsim/config.hpp"
#include "fishsim/dynamics.hpp"
#include "fishsim/errors.hpp"
#include "fishsim/optimizer.hpp"
#include "fishsim/tasks.hpp"

namespace fishsim {

// Nine significant digits: enough that double -> text -> double is stable at
// the tolerances used anywhere in the project, short enough to stay legible.
inline std::string fmt9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return ss.str();
}

// Creates parent directories as needed.
inline void write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path(), ec);
    if (ec)
      throw IoError("cannot create directory '" + p.parent_path().string() +
                    "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  out.flush();
  if (!out) throw IoError("write failure on '" + path + "'");
}

inline const char* task_type_name(const TaskSpec& spec) {
  if (std::holds_alternative<CruiseTask>(spec.task)) return "cruise";
  if (std::holds_alternative<PathFollowTask>(spec.task)) return "path_follow";
  return "pose_control";
}

namespace detail {

// Column layout shared by the CSV and JSONL writers: base pose, joint angles,
// joint rates, commanded targets (widest command over the run; runs without a
// controller have no cmd columns), cumulative actuation energy.
inline std::vector<std::string> trajectory_columns(const Trajectory& traj) {
  int nj = 0, na = 0;
  for (const TrajectorySample& s : traj.samples) {
    nj = std::max(nj, static_cast<int>(s.state.q.size()));
    na = std::max(na, static_cast<int>(s.cmd_angle.size()));
  }
  std::vector<std::string> cols = {"t", "x", "y", "theta"};
  for (int j = 0; j < nj; ++j) cols.push_back("q_" + std::to_string(j));
  for (int j = 0; j < nj; ++j) cols.push_back("qd_" + std::to_string(j));
  for (int a = 0; a < na; ++a) cols.push_back("cmd_" + std::to_string(a));
  cols.push_back("energy_in");
  return cols;
}

inline void trajectory_row(const TrajectorySample& s, int nj, int na,
                           std::vector<double>& row) {
  row.clear();
  row.push_back(s.state.t);
  row.push_back(s.state.base.position.x());
  row.push_back(s.state.base.position.y());
  row.push_back(s.state.base.angle);
  for (int j = 0; j < nj; ++j)
    row.push_back(j < s.state.q.size() ? s.state.q[j] : 0.0);
  for (int j = 0; j < nj; ++j)
    row.push_back(j < s.state.q_dot.size() ? s.state.q_dot[j] : 0.0);
  for (int a = 0; a < na; ++a)
    row.push_back(a < s.cmd_angle.size() ? s.cmd_angle[a] : 0.0);
  row.push_back(s.energy_in);
}

}  // namespace detail

inline std::string trajectory_csv(const Trajectory& traj) {
  const std::vector<std::string> cols = detail::trajectory_columns(traj);
  const int nj = static_cast<int>((cols.size() - 5) / 2);  // t,x,y,theta,...,energy_in
  const int na = static_cast<int>(cols.size()) - 5 - 2 * nj;
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  std::vector<double> row;
  for (const TrajectorySample& s : traj.samples) {
    detail::trajectory_row(s, nj, na, row);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += fmt9(row[i]);
    }
    out += '\n';
  }
  return out;
}

// Line 1 is a JSON header object; every following line is a JSON array in
// column order. Same columns and formatting as the CSV.
inline std::string trajectory_jsonl(const Trajectory& traj,
                                    const std::string& spec_hash = "") {
  const std::vector<std::string> cols = detail::trajectory_columns(traj);
  const int nj = static_cast<int>((cols.size() - 5) / 2);
  const int na = static_cast<int>(cols.size()) - 5 - 2 * nj;
  nlohmann::json header = {{"schema_version", kSchemaVersion},
                           {"spec_hash", spec_hash.empty() ? traj.spec_hash : spec_hash},
                           {"dt", traj.dt},
                           {"stride", traj.stride},
                           {"columns", cols}};
  std::string out = header.dump();
  out += '\n';
  std::vector<double> row;
  for (const TrajectorySample& s : traj.samples) {
    detail::trajectory_row(s, nj, na, row);
    out += '[';
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += fmt9(row[i]);
    }
    out += "]\n";
  }
  return out;
}

// Metrics as JSON; fields that do not apply to the task are null.
inline nlohmann::json metrics_to_json(const MetricsReport& m,
                                      const std::string& spec_hash,
                                      const std::string& task) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["spec_hash"] = spec_hash;
  j["task"] = task;
  j["time_to_target"] = m.time_to_target ? nlohmann::json(*m.time_to_target)
                                         : nlohmann::json(nullptr);
  j["cost_of_transport"] = m.cost_of_transport
                               ? nlohmann::json(*m.cost_of_transport)
                               : nlohmann::json(nullptr);
  j["mean_cte"] = m.mean_cte ? nlohmann::json(*m.mean_cte) : nlohmann::json(nullptr);
  j["max_cte"] = m.max_cte ? nlohmann::json(*m.max_cte) : nlohmann::json(nullptr);
  j["final_heading_error"] = m.final_heading_error
                                 ? nlohmann::json(*m.final_heading_error)
                                 : nlohmann::json(nullptr);
  j["net_displacement"] = m.net_displacement;
  return j;
}

// One-row CSV of the same metrics; fields that do not apply stay empty.
inline std::string metrics_csv(const MetricsReport& m) {
  auto cell = [](const std::optional<double>& v) {
    return v ? fmt9(*v) : std::string();
  };
  std::string out =
      "time_to_target,cost_of_transport,mean_cte,max_cte,final_heading_error,"
      "net_displacement\n";
  out += cell(m.time_to_target) + ',' + cell(m.cost_of_transport) + ',' +
         cell(m.mean_cte) + ',' + cell(m.max_cte) + ',' +
         cell(m.final_heading_error) + ',' + fmt9(m.net_displacement) + '\n';
  return out;
}

// Full training record: winning gait, per-iteration statistics, warnings and
// the metrics of the winning rollout. Non-finite scores (failed samples,
// empty iterations) serialize as null.
inline nlohmann::json training_to_json(const TrainingResult& r,
                                       const std::string& spec_hash,
                                       const std::string& variant,
                                       std::uint64_t seed) {
  auto num = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["spec_hash"] = spec_hash;
  j["variant"] = variant;
  j["seed"] = seed;
  j["best_score"] = num(r.best_score);
  j["baseline_score"] = num(r.baseline_score);
  j["best_params"] = detail::params_to_json(r.best_params);
  j["best_vector"] = detail::vector_to_json(r.best_vector);
  j["history"] = nlohmann::json::array();
  for (const IterationStats& it : r.history)
    j["history"].push_back({{"iteration", it.iteration},
                            {"best_score", num(it.best_score)},
                            {"best_ever", num(it.best_ever)},
                            {"mean_score", num(it.mean_score)},
                            {"mean", detail::vector_to_json(it.mean)},
                            {"stddev", detail::vector_to_json(it.stddev)}});
  j["warnings"] = r.warnings;
  j["metrics"] = metrics_to_json(r.best_metrics, spec_hash, "");
  j["metrics"].erase("spec_hash");
  j["metrics"].erase("task");
  j["metrics"].erase("schema_version");
  return j;
}

// Reads best_params back out of a training record.
inline ControllerParams params_from_training_json(const nlohmann::json& j,
                                                  const SkeletonSpec& spec) {
  if (!j.contains("best_params"))
    throw ConfigError("controller_file", "missing best_params");
  return detail::controller_from_json(j.at("best_params"), spec);
}

struct SweepRow {
  double frequency_hz = 0.0;
  double mean_thrust_n = 0.0;
  double stddev_thrust_n = 0.0;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "frequency_hz,mean_thrust_n,stddev_thrust_n\n";
  for (const SweepRow& r : rows)
    out += fmt9(r.frequency_hz) + ',' + fmt9(r.mean_thrust_n) + ',' +
           fmt9(r.stddev_thrust_n) + '\n';
  return out;
}

}  // namespace fishsim
