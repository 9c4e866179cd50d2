#pragma once

#include <stdexcept>
#include <string>

namespace ordreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad arguments, malformed data, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Formula or term-list syntax error; carries the character offset.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t position)
      : ValidationError(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Optimizer failed to reach the gradient tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, int iterations, double max_abs_gradient,
                   double best_nll)
      : Error(message),
        iterations_(iterations),
        max_abs_gradient_(max_abs_gradient),
        best_nll_(best_nll) {}
  int iterations() const noexcept { return iterations_; }
  double max_abs_gradient() const noexcept { return max_abs_gradient_; }
  double best_nll() const noexcept { return best_nll_; }

 private:
  int iterations_;
  double max_abs_gradient_;
  double best_nll_;
};

/// Coefficients diverge because some design column separates the responses.
class SeparationError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace ordreg
