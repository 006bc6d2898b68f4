#pragma once

#include <stdexcept>
#include <string>

namespace mfe {

/// Invalid argument value (wrong sizes, out-of-range parameters).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation
/// (point off the simplex, nonpositive entry for a projective metric).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mfe
