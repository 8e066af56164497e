#pragma once

#include <stdexcept>
#include <string>

namespace molte {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied a value outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A linear-algebra step could not be carried out (non-SPD matrix,
/// non-positive predictive variance, failed factorization).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A policy asked for more measurements than the budget allows.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing an artifact failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace molte
