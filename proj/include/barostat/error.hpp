#pragma once

#include <stdexcept>
#include <string>

namespace barostat {

/// Failure categories. The numeric values double as CLI exit codes and as
/// C API status codes, so they must stay stable.
enum class ErrorKind : int {
  InvalidArgument = 1,
  Config = 2,
  Numerical = 3,
  FitRefused = 4,
  Io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

const char* to_string(ErrorKind kind) noexcept;

/// Emits a non-fatal diagnostic on stderr.
void warn(const std::string& msg);

}  // namespace barostat
