#pragma once

#include <stdexcept>
#include <string>

namespace netdenoise {

/// Invalid configuration or parameters supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent input data (adjacency files, bundles, stacks).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative numerical routine hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netdenoise
