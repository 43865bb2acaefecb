#pragma once

#include <stdexcept>
#include <string>

namespace facet {

/// Invalid scenario, solver, or sweep configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Problem instance has no feasible solution (e.g. fewer subcarriers than devices).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace facet
