#pragma once

#include <stdexcept>
#include <string>

namespace bayessum {

// Base of every error thrown by the library. Subclasses mirror the
// failure categories callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a routine.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Request the implementation cannot honour: unsupported pair, overflow,
// enumeration cap, series non-convergence, unavailable closed form.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Violated precondition between caller and callee (length mismatch, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Gram matrix not positive definite even after the jitter ladder, or
// duplicate sample locations were supplied.
class SingularGramError : public Error {
 public:
  using Error::Error;
};

// Difference score undefined because p(x) = 0.
class SingularScoreError : public Error {
 public:
  using Error::Error;
};

// Non-finite or out-of-window numerical result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bayessum
