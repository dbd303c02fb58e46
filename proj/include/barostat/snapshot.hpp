#pragma once

#include <string>
#include <vector>

#include "barostat/fields.hpp"

namespace barostat {

/// Field dump: one JSON header line
///   {"dim":..,"n":[..],"extent":[..],"fields":[..]}
/// followed by each field as raw little-endian float64, cell index
/// i * n[1] + j.
struct Snapshot {
  Grid grid;
  std::vector<std::string> names;
  std::vector<std::vector<double>> fields;

  /// Throws InvalidArgument when the name is absent.
  ScalarField field(const std::string& name) const;
};

void write_snapshot(const std::string& path, const Snapshot& snap);
/// Throws Io for unreadable or truncated files, Config for a bad header.
Snapshot read_snapshot(const std::string& path);

}  // namespace barostat
