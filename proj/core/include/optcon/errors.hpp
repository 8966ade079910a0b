#pragma once

#include <stdexcept>
#include <string>

namespace optcon {

// Raised when an operation's documented precondition does not hold
// (wrong graph class, rank-deficient input, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A time or index outside the admissible horizon.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// The requested set cannot be represented by the ConvexSet family
// (affine-subspace argmin, argmin of a Sum, ...).
class UnsupportedRepresentation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalDivergence : public std::runtime_error {
 public:
  NumericalDivergence(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}

  // First sample time at which the state became non-finite or exceeded
  // the divergence bound.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace optcon
