#pragma once

#include <stdexcept>
#include <string>

namespace lyhlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: non-finite coordinates, mismatched grids, bad indices.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A value left the domain of the operation (non-positive density, |h| >= 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid model, grid or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The homothety scale a(t) reached zero inside the requested window.
class ExtinctionError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant failed, e.g. a tensor expected Hermitian is not.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace lyhlab
