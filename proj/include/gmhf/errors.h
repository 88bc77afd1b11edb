#pragma once

#include <stdexcept>
#include <string>

namespace gmhf {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad molecule files, invalid parameters, bad initial
/// guesses.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// The arithmetic left the regime where results can be trusted, e.g. a Gram
/// factorization lost positive definiteness or an orbital energy became
/// non-negative.
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace gmhf
