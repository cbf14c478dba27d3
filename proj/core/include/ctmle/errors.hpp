#pragma once

#include <stdexcept>
#include <string>

namespace ctmle {

// invalid user-facing configuration (bad grids, malformed files); the CLI
// maps this to exit code 2
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// numerical failure during integration; carries the first bad time stamp
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double t)
      : std::runtime_error(what + " at t=" + std::to_string(t)), time(t) {}
  double time;
};

}  // namespace ctmle
