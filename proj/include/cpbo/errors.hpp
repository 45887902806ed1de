#pragma once

#include <stdexcept>
#include <string>

namespace cpbo {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values or domain bounds.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Vectors or matrices whose sizes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap or lost numerical stability.
class SolverError : public Error {
 public:
  using Error::Error;
};

// System identification could not produce a model (e.g. a constant channel).
class IdentificationError : public Error {
 public:
  using Error::Error;
};

// Not enough observations for the requested query.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Malformed text records, unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpbo
