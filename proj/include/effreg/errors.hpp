#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace effreg {

// Non-finite inputs and out-of-domain values.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent parameters or state (wrong dimension, bad step size, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A runtime invariant failed during a run; carries the 1-based step index.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace effreg
