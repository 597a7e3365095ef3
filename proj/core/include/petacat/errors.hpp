#pragma once

#include <stdexcept>
#include <string>

namespace petacat {

/// Bad input: a violated precondition, a malformed record or flag. Maps to
/// exit code 2 in the command-line tool.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Filesystem or format failure while reading/writing a store. Exit code 3.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace petacat
