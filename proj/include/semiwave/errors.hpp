#pragma once

#include <stdexcept>
#include <string>

namespace semiwave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (e.g. E0 <= V(base)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Grid or sampling too coarse for the requested scale.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Observable momentum support exceeds the alias-free band of a discrete field.
class AliasingError : public Error {
 public:
  using Error::Error;
};

/// Undamped ray that never leaves the support of the observable.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class CausticError : public Error {
 public:
  using Error::Error;
};

class DegenerateTurningError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace semiwave
