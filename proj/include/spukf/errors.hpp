#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spukf {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t column, double pivot)
      : Error("matrix is not positive semi-definite: pivot " + std::to_string(pivot) +
              " at column " + std::to_string(column)),
        column_(column),
        pivot_(pivot) {}

  std::size_t column() const noexcept { return column_; }
  double pivot() const noexcept { return pivot_; }

 private:
  std::size_t column_;
  double pivot_;
};

class IntegrationFailure : public Error {
 public:
  explicit IntegrationFailure(double time)
      : Error("non-finite derivative at t = " + std::to_string(time)), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class NonFiniteEvaluation : public Error {
 public:
  explicit NonFiniteEvaluation(std::size_t component)
      : Error("non-finite function value while perturbing component " +
              std::to_string(component)),
        component_(component) {}

  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

class SingularInnovation : public Error {
 public:
  SingularInnovation() : Error("innovation covariance is not positive definite") {}
};

class NoPositiveRoot : public Error {
 public:
  using Error::Error;
};

class SingularGeometry : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace spukf
