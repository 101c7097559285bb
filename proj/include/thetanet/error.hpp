#pragma once

#include <stdexcept>
#include <string>

namespace thetanet {

// Bad user input: malformed config, invalid distribution parameters, unknown
// recipe. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite state, singular order parameter, Newton failure, step underflow.
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thetanet
