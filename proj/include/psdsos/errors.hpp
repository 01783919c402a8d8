#pragma once

#include <stdexcept>
#include <string>

namespace psdsos {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent vector/matrix sizes between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a documented precondition (range, family, symmetry).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Matrix factorization failed even at the largest jitter level.
class IndefiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent file contents.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace psdsos
