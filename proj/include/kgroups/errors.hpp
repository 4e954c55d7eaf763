#pragma once

#include <stdexcept>
#include <string>

namespace kgroups {

/// Malformed or unusable input data (bad CSV cell, degenerate labels, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition (k too large, i == j, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Recognized option whose behavior is deliberately not provided.
class NotImplemented : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

void log_warning(const std::string& message);

}  // namespace kgroups
