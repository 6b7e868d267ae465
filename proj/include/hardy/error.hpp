#pragma once

#include <stdexcept>
#include <string>

namespace hardy {

/// Bad input: mismatched grids, violated preconditions, malformed parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input has a component in the kernel of L where an inverse was requested.
class KernelComponent : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// An iterative method or a solver failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hardy
