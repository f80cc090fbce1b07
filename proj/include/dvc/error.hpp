#pragma once

#include <stdexcept>
#include <string>

namespace dvc {

// Bad argument or configuration value; the CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be opened, read or written; exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File was readable but its content violates the format or a data invariant.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine failed (non-finite loss, malformed scorer output).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dvc
