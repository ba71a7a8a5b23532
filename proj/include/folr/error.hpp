#pragma once

#include <stdexcept>
#include <string>

namespace folr {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or basis lies outside the domain it is used on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix sizes disagree, or samples mix bases.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical solve could not be carried out (singular system, divergence).
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// An input violates a documented invariant (unordered thresholds, bad cost...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent pipeline configuration (too few folds, missing classes).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. Messages carry line and field context.
class ParseError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Well-formed file whose rows break the format contract (duplicates...).
class FormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A label outside {1..K}.
class RangeError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Curve and label files do not describe the same ids.
class JoinError : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace folr
