#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glasso {

// Base class for all library errors so callers can catch the whole family.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A triangular factorization hit a non-positive pivot.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, std::size_t pivot)
      : Error(what), pivot_index(pivot) {}
  std::size_t pivot_index;
};

// A precision-recovery denominator came out non-positive, meaning the
// iterate left the positive-definite cone or B is inconsistent with W.
class NonPositivePivot : public NotPositiveDefinite {
 public:
  NonPositivePivot(const std::string& what, std::size_t column)
      : NotPositiveDefinite(what, column), column(column) {}
  std::size_t column;
};

// Quadratic-form matrix has a non-positive diagonal entry.
class InvalidDiagonal : public Error {
 public:
  InvalidDiagonal(const std::string& what, std::size_t index)
      : Error(what), index(index) {}
  std::size_t index;
};

// A data column carries no information (constant or non-finite variance).
class DegenerateData : public Error {
 public:
  DegenerateData(const std::string& what, std::size_t column)
      : Error(what), column(column) {}
  std::size_t column;
};

// Penalty calibration bounds do not bracket the requested sparsity target.
class BoundsDoNotBracket : public Error {
 public:
  using Error::Error;
};

// Text input could not be parsed; positions are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line(line), column(column) {}
  std::size_t line;
  std::size_t column;
};

class NonNumericCell : public ParseError {
 public:
  using ParseError::ParseError;
};

// Covariance input deviates from symmetry beyond tolerance.
class AsymmetricInput : public Error {
 public:
  AsymmetricInput(const std::string& what, std::size_t i, std::size_t j)
      : Error(what), row(i), col(j) {}
  std::size_t row;
  std::size_t col;
};

}  // namespace glasso
