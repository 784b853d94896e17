#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "controller.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "hydrodynamics.hpp"
#include "tasks.hpp"

namespace fishsim {

struct OptimizerConfig {
  int population = 32;
  double elite_fraction = 0.25;
  int iterations = 40;
  std::uint64_t seed = 0;
  Eigen::VectorXd init_mean, init_std, min_std;
  Eigen::VectorXd lower, upper;  // size 0 = unbounded

  int elite_count() const {
    return std::max(1, static_cast<int>(std::lround(population * elite_fraction)));
  }

  void validate() const {
    if (population < 4) throw ConfigError("optimizer.population", "must be >= 4");
    if (!(elite_fraction > 0.0 && elite_fraction < 1.0))
      throw ConfigError("optimizer.elite_fraction", "must be in (0, 1)");
    if (iterations < 0) throw ConfigError("optimizer.iterations", "must be >= 0");
    const auto d = init_mean.size();
    if (d == 0) throw ConfigError("optimizer.init_mean", "must not be empty");
    if (init_std.size() != d || min_std.size() != d)
      throw ConfigError("optimizer.init_std", "init_std/min_std size must match init_mean");
    if ((init_std.array() < 0.0).any()) throw ConfigError("optimizer.init_std", "must be >= 0");
    if ((min_std.array() < 0.0).any()) throw ConfigError("optimizer.min_std", "must be >= 0");
    if (lower.size() != 0 || upper.size() != 0) {
      if (lower.size() != d || upper.size() != d)
        throw ConfigError("optimizer.lower", "bound sizes must match init_mean");
      if ((lower.array() > upper.array()).any())
        throw ConfigError("optimizer.lower", "lower must be <= upper");
    }
  }
};

namespace detail {

// Standard normal draws via Box-Muller over the raw 64-bit stream, so the
// sequence is identical across standard libraries.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]: keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  double uniform01() {  // [0, 1) with 53 random bits
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline std::string format_params(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

}  // namespace detail

struct IterationStats {
  int iteration = 0;
  double best_score = -std::numeric_limits<double>::infinity();  // this iteration
  double best_ever = -std::numeric_limits<double>::infinity();
  double mean_score = -std::numeric_limits<double>::infinity();  // finite scores only
  Eigen::VectorXd mean, stddev;  // post-refit sampling distribution
};

struct OptimizeResult {
  Eigen::VectorXd best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<IterationStats> history;
  std::vector<std::string> warnings;
};

// Cross-entropy method over a diagonal Gaussian: sample, clamp to bounds,
// evaluate, refit mean/std to the elite set with a std floor, return the
// best sample ever seen. Fully reproducible from the seed; evaluation
// results are keyed by sample index so scheduling cannot change elites.
// Objectives may return -inf to mark a failed sample; NaN or +inf is an
// error.
inline OptimizeResult optimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const OptimizerConfig& config) {
  config.validate();
  const Eigen::Index dim = config.init_mean.size();
  const bool bounded = config.lower.size() != 0;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  auto clamp = [&](Eigen::VectorXd x) {
    if (bounded) x = x.cwiseMax(config.lower).cwiseMin(config.upper);
    return x;
  };
  auto eval = [&](const Eigen::VectorXd& x) {
    const double s = objective(x);
    if (std::isnan(s) || s == std::numeric_limits<double>::infinity())
      throw SimulationError("optimize: non-finite objective value at params " +
                            detail::format_params(x));
    return s;
  };

  OptimizeResult result;
  if (config.population < 2 * config.elite_count())
    result.warnings.push_back("population " + std::to_string(config.population) +
                              " is below twice the elite count " +
                              std::to_string(config.elite_count()));

  Eigen::VectorXd mean = clamp(config.init_mean);
  Eigen::VectorXd stddev = config.init_std;
  if (config.iterations == 0) {
    result.best = mean;
    result.best_score = eval(mean);
    return result;
  }

  detail::NormalSampler normal(config.seed);
  const int pop = config.population;
  const int n_elite = config.elite_count();
  std::vector<Eigen::VectorXd> samples(pop);
  std::vector<double> scores(pop);
  std::vector<int> order(pop);

  result.best = mean;
  for (int iter = 0; iter < config.iterations; ++iter) {
    for (int i = 0; i < pop; ++i) {
      Eigen::VectorXd x(dim);
      for (Eigen::Index d = 0; d < dim; ++d) x[d] = mean[d] + stddev[d] * normal();
      samples[i] = clamp(std::move(x));
    }
    for (int i = 0; i < pop; ++i) scores[i] = eval(samples[i]);

    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;  // index tie-break keeps elites deterministic
    });

    IterationStats stats;
    stats.iteration = iter;
    stats.best_score = scores[order.front()];
    if (stats.best_score > result.best_score) {
      result.best_score = stats.best_score;
      result.best = samples[order.front()];
    }
    stats.best_ever = result.best_score;
    double finite_sum = 0.0;
    int finite_count = 0;
    for (int i = 0; i < pop; ++i)
      if (scores[i] != neg_inf) {
        finite_sum += scores[i];
        ++finite_count;
      }
    stats.mean_score = finite_count > 0 ? finite_sum / finite_count : neg_inf;

    // Refit over the elite set, dropping failed (-inf) members. Summing
    // offsets from the top elite keeps a degenerate (all-identical)
    // population an exact fixed point of the update.
    int n_fit = 0;
    Eigen::VectorXd fit_mean = Eigen::VectorXd::Zero(dim);
    for (int e = 0; e < n_elite; ++e) {
      if (scores[order[e]] == neg_inf) break;
      fit_mean += samples[order[e]] - samples[order[0]];
      ++n_fit;
    }
    if (n_fit == 0) {
      result.warnings.push_back("iteration " + std::to_string(iter) +
                                ": all samples failed; sampling distribution kept");
    } else {
      fit_mean = samples[order[0]] + fit_mean / n_fit;
      Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
      for (int e = 0; e < n_fit; ++e) {
        const Eigen::VectorXd d = samples[order[e]] - fit_mean;
        var += d.cwiseProduct(d);
      }
      mean = fit_mean;
      stddev = (var / n_fit).cwiseSqrt().cwiseMax(config.min_std);
    }
    stats.mean = mean;
    stats.stddev = stddev;
    result.history.push_back(std::move(stats));
  }
  return result;
}

enum class DriveMode { Sine, Gear };

struct TrainOptions {
  int eval_stride = 10;         // sample decimation inside the objective
  int rollout_stride = 1;       // stride for the returned best trajectory
  DriveMode drive = DriveMode::Sine;
  GearTrainSpec gear;           // used when drive == Gear
  Pose initial_base{{0.0, 0.0}, kPi};  // nose at origin, swimming toward +x
};

struct TrainingResult {
  ControllerParams best_params;
  Eigen::VectorXd best_vector;
  double best_score = -std::numeric_limits<double>::infinity();
  double baseline_score = 0.0;  // zero-amplitude controller, same budget
  std::vector<IterationStats> history;
  std::vector<std::string> warnings;
  Trajectory best_trajectory;
  MetricsReport best_metrics;
};

// Controller search on a task: objective = reward(simulate(params), task).
// Simulation failures score -inf instead of aborting the iteration.
inline TrainingResult train(const SkeletonSpec& spec, const TaskSpec& task,
                            const FluidParams& fluid, const OptimizerConfig& config_in,
                            const TrainOptions& opt = {}) {
  spec.validate();
  fluid.validate();
  task.validate();
  if (spec.active.empty()) throw ConfigError("train: skeleton has no active joints");
  const double total_mass = spec.total_mass();

  auto rollout = [&](const Eigen::VectorXd& v, int stride) {
    const ControllerParams p = decode_params(v, spec);
    const Controller ctrl = opt.drive == DriveMode::Gear
                                ? make_gear_controller(spec, opt.gear, p, task.duration, task.dt)
                                : make_controller(spec, p);
    const BodyState s0 = initial_state(spec, opt.initial_base, ctrl);
    SimulateOptions so;
    so.stride = stride;
    return simulate(spec, s0, ctrl, fluid, task.duration, task.dt, so);
  };
  auto objective = [&](const Eigen::VectorXd& v) {
    try {
      return reward(rollout(v, opt.eval_stride), task, total_mass);
    } catch (const SimulationError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  OptimizerConfig config = config_in;
  const ParamBounds bounds = param_bounds(spec);
  if (config.lower.size() == 0) {
    config.lower = bounds.lower;
    config.upper = bounds.upper;
  }
  if (config.init_mean.size() == 0) {
    ControllerParams mid = zero_params(spec, 1.5);
    mid.amplitude.setConstant(0.3);
    config.init_mean = encode_params(mid, spec);
  }
  if (config.init_std.size() == 0)
    config.init_std = 0.25 * (config.upper - config.lower);
  if (config.min_std.size() == 0)
    config.min_std = Eigen::VectorXd::Constant(config.init_mean.size(), 1e-3);

  OptimizeResult best = optimize(objective, config);

  TrainingResult out;
  out.best_vector = best.best;
  out.best_params = decode_params(best.best, spec);
  out.best_score = best.best_score;
  out.history = std::move(best.history);
  out.warnings = std::move(best.warnings);
  out.baseline_score = objective(encode_params(zero_params(spec, 1.5), spec));
  out.best_trajectory = rollout(best.best, opt.rollout_stride);
  out.best_metrics = evaluate(out.best_trajectory, task, total_mass);
  return out;
}

}  // namespace fishsim
