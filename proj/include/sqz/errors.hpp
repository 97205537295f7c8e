#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

/// Argument outside the range where a formula is defined (temperature, rate, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Beam layout does not fit the cell.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested grid or problem size exceeds a hard limit.
class ResourceError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Steady-state system has more null directions than the trace constraints remove.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, int null_dimension)
      : std::runtime_error(what), null_dimension_(null_dimension) {}
  int null_dimension() const { return null_dimension_; }

 private:
  int null_dimension_;
};

/// Linearized drift has an eigenvalue with positive real part.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (i omega - M) is singular at the requested sideband frequency.
class ResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Langevin diffusion or output covariance failed a positivity check.
class ModelConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver failure at one parameter point of a scenario or sweep; the message
/// names the point.
class PointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config file or CLI input rejected; carries a location when known.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace sqz
