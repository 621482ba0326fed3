#pragma once

#include <stdexcept>
#include <string>

namespace taxelgraph {

// Bad command-line flags or configuration values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, truncated, or missing data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf reached somewhere it must not (losses, gradients, parameters).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace taxelgraph
