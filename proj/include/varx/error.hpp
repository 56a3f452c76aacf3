#pragma once

#include <stdexcept>
#include <string>

namespace varx {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix failed a structural requirement (symmetry, definiteness, shape)
// or a factorization broke down.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// The posterior is not proper for the given data and hyperparameters, or a
// conditional needed by the sampler does not exist.
class ProprietyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace varx
