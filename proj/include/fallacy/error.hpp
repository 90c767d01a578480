#pragma once

#include <stdexcept>
#include <string>

namespace fallacy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (corpus files, labeled sets, annotations).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Failure talking to an external scorer process.
class ScorerError : public Error {
 public:
  using Error::Error;
};

/// Quantity is mathematically undefined for the given input (e.g. reciprocity of an empty graph).
class Undefined : public Error {
 public:
  using Error::Error;
};

}  // namespace fallacy
