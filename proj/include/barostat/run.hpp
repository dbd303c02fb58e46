#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "barostat/error.hpp"
#include "barostat/nssolver.hpp"

namespace barostat {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed config text, with the position of the parser failure.
class ConfigParseError : public Error {
 public:
  ConfigParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(ErrorKind::Config, what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct RunRequest {
  std::string command;  ///< steady | simulate | verify | fit | sweep
  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;  ///< 0: library default
  std::optional<std::uint64_t> seed;
  std::string trajectory_path;  ///< fit only; overrides fit.trajectory
};

/// Runs one command and returns the files written (manifest last). Throws
/// barostat::Error; the kind selects the exit code.
std::vector<std::string> run_command(const RunRequest& req);

/// The simulation a config file describes, without writing any output.
TrajectoryRecord simulate_from_config(const std::string& config_path);

/// 2 for configuration, argument and file errors, 3 numerical, 4 refused fit.
int exit_code_for(ErrorKind kind) noexcept;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes) noexcept;

/// Shortest round-trip decimal form ("nan" and "inf" for non-finite values).
std::string format_number(double v);

/// Trajectory CSV columns, in order.
inline constexpr const char* kTrajectoryHeader =
    "t,mass,kinetic,potential_gap,E_rel,E_paper,dissipation_cum,V_delta,W_delta";

}  // namespace barostat
