#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dantzig {

// Base class for every error raised by the library. The CLI maps
// NumericalError subclasses to exit status 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input shape, value range or unmet precondition supplied by a caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ZeroColumnError : public InvalidArgument {
 public:
  explicit ZeroColumnError(std::size_t column)
      : InvalidArgument("column " + std::to_string(column) +
                        " has zero Euclidean norm"),
        column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

// Exhaustive enumeration would visit more subsets than allowed.
class BudgetExceeded : public InvalidArgument {
 public:
  BudgetExceeded(double required, double budget, const std::string& hint)
      : InvalidArgument("enumeration needs " + fmt(required) +
                        " subsets, budget is " + fmt(budget) + "; " + hint),
        required_(required),
        budget_(budget) {}
  double required() const { return required_; }
  double budget() const { return budget_; }

 private:
  static std::string fmt(double v);
  double required_;
  double budget_;
};

// A vector breaks the power-law decay |beta|_(k) <= R k^(-1/s).
class DecayViolation : public InvalidArgument {
 public:
  DecayViolation(std::size_t k, double value, double bound)
      : InvalidArgument("sorted magnitude " + std::to_string(k) + " is " +
                        std::to_string(value) + ", above the decay bound " +
                        std::to_string(bound)),
        k_(k) {}
  /// 1-based rank of the first violating entry.
  std::size_t k() const { return k_; }

 private:
  std::size_t k_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public NumericalError {
 public:
  RankDeficient(const std::string& what, double smallest_singular_value,
                double largest_singular_value)
      : NumericalError(what),
        smallest_(smallest_singular_value),
        largest_(largest_singular_value) {}
  double smallest_singular_value() const { return smallest_; }
  double largest_singular_value() const { return largest_; }

 private:
  double smallest_;
  double largest_;
};

// Cholesky met a non-positive pivot.
class FactorizationError : public NumericalError {
 public:
  FactorizationError(std::size_t pivot, double value)
      : NumericalError("non-positive pivot " + std::to_string(value) +
                       " at index " + std::to_string(pivot)),
        pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Line search could not keep the iterate interior with a usable step.
class StepFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The Dantzig constraint set has no strictly feasible point we can reach.
class InfeasibleCalibration : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dantzig
