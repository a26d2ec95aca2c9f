#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace magspec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, unparsable expression, unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its admissible range (k too large, delta out of range, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Regions that do not fit their grid, coverings that leave gaps.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class InvalidIndexError : public Error {
 public:
  using Error::Error;
};

/// A field evaluation produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Solver breakdowns: factorization failures, CG stagnation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_residuals)
      : NumericalError(what), best_residuals_(std::move(best_residuals)) {}

  const std::vector<double>& best_residuals() const noexcept { return best_residuals_; }

 private:
  std::vector<double> best_residuals_;
};

}  // namespace magspec
