#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace guidecheck {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required column/attribute is missing from the input.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Malformed input at a known location (1-based line; column 0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column = 0);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Model structure violates an invariant (dangling flows, bad gateway degrees).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class CompilationError : public Error {
 public:
  using Error::Error;
};

/// The net cannot be used for alignment (final marking unreachable, silent cycles).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Search exceeded its state budget.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& message, std::size_t budget)
      : Error(message), budget_(budget) {}
  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t budget_;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// The brute-force oracle could not complete any alignment within its depth bound.
class OracleInconclusive : public Error {
 public:
  using Error::Error;
};

}  // namespace guidecheck
