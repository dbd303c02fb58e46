#include "barostat/snapshot.hpp"

#include <bit>
#include <fstream>

#include "json.hpp"

namespace barostat {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

ScalarField Snapshot::field(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return ScalarField(grid, fields[k]);
  fail(ErrorKind::InvalidArgument, "snapshot: no field named '" + name + "'");
}

void write_snapshot(const std::string& path, const Snapshot& snap) {
  require(snap.names.size() == snap.fields.size(), "snapshot: names and fields differ in count");
  for (const auto& f : snap.fields) require(f.size() == snap.grid.cells(), "snapshot: field size mismatch");
  nlohmann::ordered_json h;
  h["dim"] = snap.grid.dim;
  h["n"] = snap.grid.dim == 2 ? nlohmann::ordered_json{snap.grid.n[0], snap.grid.n[1]}
                              : nlohmann::ordered_json{snap.grid.n[0]};
  h["extent"] = snap.grid.dim == 2 ? nlohmann::ordered_json{snap.grid.extent[0], snap.grid.extent[1]}
                                   : nlohmann::ordered_json{snap.grid.extent[0]};
  h["fields"] = snap.names;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "snapshot: cannot open " + path + " for writing");
  out << h.dump() << '\n';
  for (const auto& f : snap.fields)
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!out) fail(ErrorKind::Io, "snapshot: write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "snapshot: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Io, "snapshot: empty file " + path);
  Snapshot snap;
  try {
    const auto h = nlohmann::json::parse(line);
    const int dim = h.at("dim").get<int>();
    const auto n = h.at("n").get<std::vector<int>>();
    const auto ext = h.at("extent").get<std::vector<double>>();
    if ((dim != 1 && dim != 2) || static_cast<int>(n.size()) != dim || static_cast<int>(ext.size()) != dim)
      fail(ErrorKind::Config, "snapshot: inconsistent header in " + path);
    snap.grid = dim == 2 ? Grid::rect(n[0], n[1], ext[0], ext[1]) : Grid::line(n[0], ext[0]);
    snap.names = h.at("fields").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("snapshot: bad header in ") + path + ": " + e.what());
  }
  for (std::size_t k = 0; k < snap.names.size(); ++k) {
    std::vector<double> f(snap.grid.cells());
    in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(f.size() * sizeof(double)))
      fail(ErrorKind::Io, "snapshot: truncated data in " + path);
    snap.fields.push_back(std::move(f));
  }
  return snap;
}

}  // namespace barostat
