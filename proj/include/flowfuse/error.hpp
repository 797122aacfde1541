#pragma once

#include <stdexcept>
#include <string>

namespace flowfuse {

/// Failure category. The CLI maps these onto its exit codes.
enum class ErrorKind {
  InvalidArgument,  ///< bad configuration or caller contract violation
  Data,             ///< unreadable or inconsistent input data
  Numerical,        ///< solver breakdown (degenerate geometry, non-finite values)
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what, ErrorKind kind = ErrorKind::InvalidArgument) {
  if (!cond) fail(kind, what);
}

}  // namespace flowfuse
