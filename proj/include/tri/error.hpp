#pragma once

#include <stdexcept>
#include <string>

namespace tri {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (e.g. compared a special value).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A fixture table or judge does not cover a key it is asked about.
class FixtureIncomplete : public Error {
 public:
  using Error::Error;
};

/// Malformed wire frame or fixture document.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Ill-formed term, unbound variable, or non-set quantifier domain.
class EvalError : public Error {
 public:
  using Error::Error;
};

class GatewayError : public Error {
 public:
  using Error::Error;
};

}  // namespace tri
