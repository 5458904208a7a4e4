#pragma once

#include <stdexcept>
#include <string>

namespace sccount {

// Exception hierarchy. The CLI maps each type onto a distinct exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, inconsistent configuration, precondition violations.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or mismatching files (WAV, SCF1, SCW1, sidecars).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown, e.g. a reference covariance that stays indefinite
// after diagonal-loading escalation.
class NumericError : public Error {
 public:
  using Error::Error;
};

namespace detail {

[[noreturn]] inline void usage_fail(const std::string& what) { throw UsageError(what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) usage_fail(what);
}

}  // namespace detail
}  // namespace sccount
