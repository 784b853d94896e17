#pragma once

#include <stdexcept>
#include <string>

namespace fishsim {

// Invalid or inconsistent configuration (bad JSON, violated invariant, ...).
// The message carries the offending field path where one exists.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
  ConfigError(const std::string& path, const std::string& msg)
      : std::runtime_error(path + ": " + msg) {}
};

// Filesystem failure while reading or writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure while stepping the dynamics (diverged state, singular
// mass matrix). step_index is the failing step where known, else -1.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& msg, long step_index = -1)
      : std::runtime_error(step_index >= 0
                               ? msg + " (step " + std::to_string(step_index) + ")"
                               : msg),
        step(step_index) {}
  long step;
};

}  // namespace fishsim
