#pragma once

#include <stdexcept>
#include <string>

namespace relclean {

// Base class for all errors raised by the library. The CLI maps these to
// exit codes: ContractViolation/ParseError -> 2, NumericalFailure -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (bad shape, out-of-range value,
// unresolvable id, mismatched scales, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A computation produced or consumed non-finite values, or an iterative
// solver failed to converge.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `location` identifies the file and, where it makes
// sense, the line or byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& location, const std::string& what)
      : Error(location + ": " + what), location_(location) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

}  // namespace relclean
