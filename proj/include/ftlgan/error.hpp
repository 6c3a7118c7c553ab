#pragma once

#include <stdexcept>
#include <string>

namespace ftlgan {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed a shape, size or enumeration value outside the contract.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but mathematically degenerate (zero vector, zero variance...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Weight or checkpoint file missing, corrupt or not matching its declared architecture.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Corpus / manifest problems: unreadable inputs, empty populations.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration violates an invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ftlgan
