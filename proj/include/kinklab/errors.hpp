#pragma once

#include <stdexcept>
#include <string>

namespace kinklab {

// bad arguments (a <= 0, |v| >= 1, ...)
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN, overflow, stepper blow-up
struct IntegrationError : std::runtime_error {
  double t;
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " (t=" + std::to_string(time) + ")"), t(time) {}
};

struct ProjectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kinklab
