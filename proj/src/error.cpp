#include "barostat/error.hpp"

#include <iostream>

namespace barostat {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Config: return "config";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::FitRefused: return "fit_refused";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

void warn(const std::string& msg) { std::cerr << "barostat: warning: " << msg << '\n'; }

}  // namespace barostat
