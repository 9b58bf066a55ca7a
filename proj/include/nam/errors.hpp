#pragma once

#include <stdexcept>
#include <string>

namespace nam {

// Invalid or inconsistent configuration (CLI exit code 1).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A generator spec that cannot be realized (CLI exit code 2).
struct InfeasibleSpecError : std::runtime_error {
  explicit InfeasibleSpecError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / stream failures (CLI exit code 3).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nam
