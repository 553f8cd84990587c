#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace cdegan {

// All numerics run in double; the training contract is deterministic
// bit-for-bit for a fixed binary, which rules out reduced precision.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated preconditions inside the library (bad shapes, missing grads,
// non-scalar backward roots). These are bugs in the caller, not bad input.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

}  // namespace cdegan
