#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gausscov {

// Base for every error thrown by the library. Callers that only care about
// "something went wrong in gausscov" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class AllColumnsConstant : public Error {
 public:
  AllColumnsConstant() : Error("every column has zero sample variance") {}
};

// The orthogonal remainder of a column against the current basis is below
// the relative collinearity tolerance.
class CollinearColumn : public Error {
 public:
  explicit CollinearColumn(std::size_t column)
      : Error("column " + std::to_string(column + 1) +
              " is numerically in the span of the selected columns"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class NoCandidates : public Error {
 public:
  NoCandidates() : Error("no candidate column left to scan") {}
};

class TooManyColumns : public Error {
 public:
  TooManyColumns(std::size_t q, std::size_t cap)
      : Error("all-subset selection needs q <= " + std::to_string(cap) +
              ", got q = " + std::to_string(q)) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error("parse error at row " + std::to_string(row) + ", column " +
              std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_ = 0;
  std::size_t column_ = 0;
};

class MissingValue : public ParseError {
 public:
  MissingValue(std::size_t row, std::size_t column)
      : ParseError("missing value", row, column) {}
};

class InsufficientLength : public Error {
 public:
  using Error::Error;
};

class ColumnBudgetExceeded : public Error {
 public:
  ColumnBudgetExceeded(std::size_t needed, std::size_t budget)
      : Error("interaction expansion needs " + std::to_string(needed) +
              " columns, budget is " + std::to_string(budget)) {}
};

class GenerationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace gausscov
