#pragma once

#include <stdexcept>
#include <string>

namespace fundmatch {

/// Input that violates a schema, invariant or configuration bound.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable file, failed subprocess.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lookup of an identifier that does not exist in the current run.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fundmatch
