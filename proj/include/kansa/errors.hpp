#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kansa {

// Bad input: shape mismatch, out-of-range parameter, malformed configuration.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that cannot proceed for numerical reasons.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// Failure inside one backward time step; carries the step index k.
class StepError : public NumericalError {
 public:
  StepError(const std::string& what, std::size_t step)
      : NumericalError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace kansa
