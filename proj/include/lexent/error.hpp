#pragma once

#include <stdexcept>
#include <string>

namespace lexent {

/// Bad input data: malformed files, invariant violations, protocol errors.
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad invocation: unknown subcommand, missing flags, invalid parameters.
/// The CLI maps this to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lexent
