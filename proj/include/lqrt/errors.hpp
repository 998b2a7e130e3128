#pragma once

#include <stdexcept>
#include <string>

namespace lqrt {

/// Thrown when an input violates a mathematical precondition
/// (empty sample, non-positive density argument, bad q, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Thrown for invalid configuration, e.g. a test identifier that does not
/// apply to a simulation set-up.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace lqrt
