#pragma once

// Command-line front end: simulate / train / sweep.
//
// All three share one configuration pipeline: JSON file -> --override edits
// -> dedicated flags (applied as overrides themselves) -> resolve + validate.
// Nothing is written to disk until the run has finished, so a failing run
// leaves no partial artifacts.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 simulation
// failure (diverged or singular), 3 I/O failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fishsim/config.hpp"
#include "fishsim/controller.hpp"
#include "fishsim/dynamics.hpp"
#include "fishsim/errors.hpp"
#include "fishsim/io.hpp"
#include "fishsim/optimizer.hpp"

namespace fishsim {

struct ThrustMeasurement {
  double mean = 0.0;    // N, positive = pulls forward against the anchor
  double stddev = 0.0;  // N, sample standard deviation over the window
};

// Holds the base fixed, drives the gait, discards the transient and averages
// the streamwise anchor force over whole flapping cycles. Streaming (Welford)
// statistics: memory stays O(1) however slow the gait.
//
// The anchor force is the constraint force on the body; when the fish pushes
// fluid tailward the anchor must pull tailward to keep it in place, so thrust
// is the tailward component u(theta0) . F_anchor.
inline ThrustMeasurement measure_anchored_thrust(
    const SkeletonSpec& spec, const FluidParams& fluid, const Controller& ctrl,
    const Pose& base, double frequency, double dt, double settle_time,
    double measure_cycles) {
  if (!(frequency > 0.0)) throw ConfigError("sweep frequency must be > 0");
  Stepper stepper(spec, fluid, StepOptions{true});
  const BodyState s0 = initial_state(spec, base, ctrl);
  stepper.reset(s0);

  const double period = 1.0 / frequency;
  const double settle = std::max(settle_time, 2.0 * period);
  const long settle_steps = std::lround(std::ceil(settle / dt));
  const long measure_steps =
      std::max<long>(1, std::lround(measure_cycles * period / dt));

  const double t0 = s0.t;
  long k = 0;
  auto advance = [&] {
    const ActuationCommand cmd = ctrl(t0 + static_cast<double>(k + 1) * dt);
    stepper.step(&cmd, dt);
    ++k;
  };

  for (long i = 0; i < settle_steps; ++i) advance();

  const Vec2 tailward = unit(base.angle);
  double mean = 0.0, m2 = 0.0;
  for (long i = 0; i < measure_steps; ++i) {
    advance();
    const double thrust = stepper.anchor_force().dot(tailward);
    const double delta = thrust - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (thrust - mean);
  }
  ThrustMeasurement out;
  out.mean = mean;
  out.stddev = measure_steps > 1
                   ? std::sqrt(m2 / static_cast<double>(measure_steps - 1))
                   : 0.0;
  return out;
}

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline const char* variant_name(Variant v) {
  return v == Variant::SINGLE ? "single" : "full";
}

struct CliCommon {
  std::string config_path;
  std::string output;
  std::vector<std::string> overrides;
  std::string variant;
  std::string drive;
  std::uint64_t seed = 0;
  int stride = 1;
  bool anchored = false;
  double freq_min = 0.5, freq_max = 2.5;
  int sweep_steps = 5;

  CLI::Option* output_opt = nullptr;
  CLI::Option* variant_opt = nullptr;
  CLI::Option* drive_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* stride_opt = nullptr;
  CLI::Option* anchored_opt = nullptr;
  CLI::Option* freq_min_opt = nullptr;
  CLI::Option* freq_max_opt = nullptr;
  CLI::Option* sweep_steps_opt = nullptr;
};

inline void add_common_options(CLI::App* cmd, CliCommon& o) {
  cmd->add_option("-c,--config", o.config_path,
                  "JSON config file; omitted sections use the koi defaults");
  o.output_opt = cmd->add_option("-o,--output", o.output,
                                 "output directory (default: config output_dir)");
  cmd->add_option("--override", o.overrides,
                  "dotted-path config override KEY=VALUE (repeatable)");
  o.seed_opt = cmd->add_option("--seed", o.seed, "RNG seed");
  o.variant_opt =
      cmd->add_option("--variant", o.variant, "actuation variant: single | full");
  o.drive_opt = cmd->add_option("--drive", o.drive,
                                "actuator model: sine | gear");
  o.anchored_opt = cmd->add_flag("--anchored,!--free", o.anchored,
                                 "hold the base fixed (thrust-rig mode)");
  o.stride_opt =
      cmd->add_option("--stride", o.stride, "record every Nth step");
}

// Dedicated flags become overrides so that flags, --override and the file all
// flow through the single resolution path (last write wins).
inline std::vector<std::string> collect_overrides(const CliCommon& o) {
  auto quoted = [](const std::string& s) { return nlohmann::json(s).dump(); };
  std::vector<std::string> v = o.overrides;
  if (o.variant_opt->count()) v.push_back("variant=" + quoted(o.variant));
  if (o.drive_opt->count()) v.push_back("drive=" + quoted(o.drive));
  if (o.output_opt->count()) v.push_back("output_dir=" + quoted(o.output));
  if (o.seed_opt->count()) v.push_back("seed=" + std::to_string(o.seed));
  if (o.stride_opt->count())
    v.push_back("sample_stride=" + std::to_string(o.stride));
  if (o.anchored_opt->count())
    v.push_back(std::string("anchored=") + (o.anchored ? "true" : "false"));
  if (o.freq_min_opt && o.freq_min_opt->count())
    v.push_back("sweep.freq_min=" + fmt17(o.freq_min));
  if (o.freq_max_opt && o.freq_max_opt->count())
    v.push_back("sweep.freq_max=" + fmt17(o.freq_max));
  if (o.sweep_steps_opt && o.sweep_steps_opt->count())
    v.push_back("sweep.steps=" + std::to_string(o.sweep_steps));
  return v;
}

inline RunConfig load_run_config(const CliCommon& o, bool anchored_default) {
  nlohmann::json doc = nlohmann::json::object();
  if (!o.config_path.empty()) doc = parse_config_text(read_file(o.config_path));
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  if (!doc.contains("anchored")) doc["anchored"] = anchored_default;
  return resolve_config(std::move(doc), collect_overrides(o));
}

// Builds the commanded-gait controller for a run: explicit controller
// section, best_params of a previous training run, or none (coast).
inline Controller build_controller(const RunConfig& rc, double duration) {
  std::optional<ControllerParams> params = rc.controller;
  if (!params && !rc.controller_file.empty()) {
    const std::string text = read_file(rc.controller_file);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("controller_file: parse failure: " +
                        std::string(e.what()));
    }
    params = params_from_training_json(doc, rc.skeleton);
  }
  if (!params) return Controller();
  if (rc.drive == DriveMode::Gear)
    return make_gear_controller(rc.skeleton, rc.geartrain, *params,
                                duration + 2.0 * rc.task.dt, rc.task.dt);
  return make_controller(rc.skeleton, *params);
}

inline void write_trajectory_artifacts(const std::string& dir,
                                       const Trajectory& traj,
                                       const MetricsReport& metrics,
                                       const RunConfig& rc) {
  write_file(dir + "/trajectory.csv", trajectory_csv(traj));
  write_file(dir + "/trajectory.jsonl", trajectory_jsonl(traj, rc.spec_hash));
  write_file(dir + "/metrics.json",
             metrics_to_json(metrics, rc.spec_hash, task_type_name(rc.task))
                     .dump(2) +
                 "\n");
  write_file(dir + "/metrics.csv", metrics_csv(metrics));
  write_file(dir + "/config.json", rc.resolved.dump(2) + "\n");
}

inline int cmd_simulate(const CliCommon& o) {
  const RunConfig rc = load_run_config(o, /*anchored_default=*/false);
  const Controller ctrl = build_controller(rc, rc.task.duration);
  BodyState s0 = initial_state(rc.skeleton, rc.initial_base, ctrl);
  s0.base_vel = rc.initial_vel;

  SimulateOptions sopt;
  sopt.stride = rc.sample_stride;
  sopt.anchored = rc.anchored;
  sopt.spec_hash = rc.spec_hash;
  const Trajectory traj = simulate(rc.skeleton, s0, ctrl, rc.fluid,
                                   rc.task.duration, rc.task.dt, sopt);
  const MetricsReport metrics =
      evaluate(traj, rc.task, rc.skeleton.total_mass());

  write_trajectory_artifacts(rc.output_dir, traj, metrics, rc);
  std::cout << metrics_to_json(metrics, rc.spec_hash, task_type_name(rc.task))
                   .dump(2)
            << "\n";
  return 0;
}

inline int cmd_train(const CliCommon& o) {
  const RunConfig rc = load_run_config(o, /*anchored_default=*/false);

  TrainOptions topt;
  topt.rollout_stride = rc.sample_stride;
  topt.drive = rc.drive;
  topt.gear = rc.geartrain;
  topt.initial_base = rc.initial_base;
  const TrainingResult result =
      train(rc.skeleton, rc.task, rc.fluid, rc.optimizer, topt);

  std::printf("%5s  %14s  %14s  %14s\n", "iter", "best", "mean", "best_ever");
  for (const IterationStats& it : result.history)
    std::printf("%5d  %14.6g  %14.6g  %14.6g\n", it.iteration, it.best_score,
                it.mean_score, it.best_ever);
  std::printf("best score     %.6g\n", result.best_score);
  std::printf("baseline score %.6g\n", result.baseline_score);
  std::printf("best frequency %.6g Hz\n", result.best_params.frequency);
  for (Eigen::Index a = 0; a < result.best_params.amplitude.size(); ++a)
    std::printf("joint %ld: amplitude %.6g rad, bias %.6g rad, phase %.6g rad\n",
                static_cast<long>(a), result.best_params.amplitude[a],
                result.best_params.bias[a], result.best_params.phase[a]);
  for (const std::string& w : result.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());

  Trajectory best = result.best_trajectory;
  best.spec_hash = rc.spec_hash;
  write_file(rc.output_dir + "/training.json",
             training_to_json(result, rc.spec_hash,
                              variant_name(rc.variant), rc.optimizer.seed)
                     .dump(2) +
                 "\n");
  write_trajectory_artifacts(rc.output_dir, best, result.best_metrics, rc);
  return 0;
}

inline int cmd_sweep(const CliCommon& o) {
  const RunConfig rc = load_run_config(o, /*anchored_default=*/true);
  if (!rc.anchored)
    throw ConfigError("anchored", "the thrust sweep needs the anchored rig");
  const SweepConfig& sw = rc.sweep;
  const double dt = rc.task.dt;
  const int na = static_cast<int>(rc.skeleton.active.size());

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(sw.steps));
  for (int i = 0; i < sw.steps; ++i) {
    const double f =
        sw.steps == 1 ? sw.freq_min
                      : sw.freq_min + (sw.freq_max - sw.freq_min) *
                                          static_cast<double>(i) /
                                          static_cast<double>(sw.steps - 1);
    ControllerParams params;
    params.frequency = f;
    params.amplitude = Eigen::VectorXd::Constant(na, sw.amplitude);
    params.bias = Eigen::VectorXd::Zero(na);
    params.phase = Eigen::VectorXd::Zero(na);
    validate_params(params, rc.skeleton);

    Controller ctrl;
    if (rc.drive == DriveMode::Gear) {
      const double settle = std::max(sw.settle_time, 2.0 / f);
      const double duration = settle + sw.measure_cycles / f + 2.0 * dt;
      ctrl = make_gear_controller(rc.skeleton, rc.geartrain, params, duration, dt);
    } else {
      ctrl = make_controller(rc.skeleton, params);
    }

    const ThrustMeasurement m = measure_anchored_thrust(
        rc.skeleton, rc.fluid, ctrl, rc.initial_base, f, dt, sw.settle_time,
        sw.measure_cycles);
    rows.push_back({f, m.mean, m.stddev});
    std::printf("f = %8.4g Hz   thrust = %12.5g N   stddev = %12.5g N\n", f,
                m.mean, m.stddev);
  }

  write_file(rc.output_dir + "/sweep.csv", sweep_csv(rows));
  write_file(rc.output_dir + "/config.json", rc.resolved.dump(2) + "\n");
  return 0;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "fishsim: desk-scale articulated-swimmer simulator and gait trainer"};
  app.require_subcommand(1);

  detail::CliCommon sim_opts, train_opts, sweep_opts;
  CLI::App* sim = app.add_subcommand(
      "simulate", "roll out one run and write trajectory + metrics");
  detail::add_common_options(sim, sim_opts);
  CLI::App* trn = app.add_subcommand(
      "train", "cross-entropy search for gait parameters on the task");
  detail::add_common_options(trn, train_opts);
  CLI::App* swp = app.add_subcommand(
      "sweep", "frequency sweep of anchored thrust (anchored by default)");
  detail::add_common_options(swp, sweep_opts);
  sweep_opts.freq_min_opt =
      swp->add_option("--freq-min", sweep_opts.freq_min, "first frequency, Hz");
  sweep_opts.freq_max_opt =
      swp->add_option("--freq-max", sweep_opts.freq_max, "last frequency, Hz");
  sweep_opts.sweep_steps_opt =
      swp->add_option("--steps", sweep_opts.sweep_steps, "grid points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) return detail::cmd_simulate(sim_opts);
    if (trn->parsed()) return detail::cmd_train(train_opts);
    if (swp->parsed()) return detail::cmd_sweep(sweep_opts);
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fishsim
