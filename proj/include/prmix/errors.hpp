#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prmix {

/// Invalid (observation, support point) pairing for a kernel, or an invalid
/// parameter for a domain type.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration rejected before any computation (bad flags, bad grid, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or empty input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature, iteration or other numerical failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The predictive density m_{i-1}(Y_i) vanished (or fell below the floor):
/// the observation lies outside what the current support can explain.
class NondegeneracyError : public NumericalError {
 public:
  NondegeneracyError(std::size_t step, double observation, double log_predictive)
      : NumericalError("predictive density vanished at step " + std::to_string(step) +
                       " (observation " + std::to_string(observation) +
                       ", log m = " + std::to_string(log_predictive) + ")"),
        step_(step),
        observation_(observation) {}

  std::size_t step() const noexcept { return step_; }
  double observation() const noexcept { return observation_; }

 private:
  std::size_t step_;
  double observation_;
};

}  // namespace prmix
