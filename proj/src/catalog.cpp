#include "barostat/catalog.hpp"

#include <cmath>
#include <numbers>

#include "barostat/snapshot.hpp"

namespace barostat {

namespace {

const double pi = std::numbers::pi;

std::vector<double> snapshot_field(const Snapshot& snap, const std::string& name, const std::string& path) {
  for (std::size_t k = 0; k < snap.names.size(); ++k)
    if (snap.names[k] == name) return snap.fields[k];
  fail(ErrorKind::Config, "snapshot " + path + " has no field '" + name + "'");
}

}  // namespace

ScalarField make_potential(const PotentialSpec& spec, const Grid& g) {
  const double lx = g.extent[0];
  const auto& n = spec.name;
  if (n == "tabulated") {
    const Snapshot snap = read_snapshot(spec.path);
    return ScalarField(snap.grid, snapshot_field(snap, spec.field, spec.path));
  }
  g.validate();
  if (n == "constant") return ScalarField(g, spec.value);
  if (n == "linear")
    return ScalarField::sample(g, [&](double x, double y) { return spec.offset + spec.slope * x + spec.slope_y * y; });
  if (n == "cosine")
    return ScalarField::sample(g, [&](double x, double) { return spec.amplitude * std::cos(spec.k * pi * x / lx); });
  if (n == "doublewell")
    return ScalarField::sample(g, [&](double x, double) {
      const double s = std::sin(2 * pi * x / lx);
      return spec.amplitude * s * s;
    });
  fail(ErrorKind::Config, "unknown potential '" + n + "' (constant, linear, cosine, doublewell, tabulated)");
}

InitialData make_initial(const InitialSpec& spec, const ScalarField& F, double gamma, double m) {
  const Grid& g = F.grid;
  InitialData d{ScalarField(g), VectorField(g)};
  if (spec.name == "uniform") {
    d.rho = ScalarField(g, m / g.volume());
    return d;
  }
  if (spec.name == "tabulated") {
    const Snapshot snap = read_snapshot(spec.path);
    if (!(snap.grid == g)) fail(ErrorKind::Config, "initial snapshot " + spec.path + " does not match the run grid");
    d.rho = ScalarField(g, snapshot_field(snap, "rho", spec.path));
    for (int c = 0; c < g.dim; ++c) {
      const std::string name = "u" + std::to_string(c);
      bool present = false;
      for (const auto& nm : snap.names) present = present || nm == name;
      if (!present) continue;
      const auto u = snapshot_field(snap, name, spec.path);
      for (std::size_t k = 0; k < g.cells(); ++k) d.mom.at(c, k) = d.rho.data[k] * u[k];
    }
    return d;
  }
  if (spec.name != "perturbed_steady")
    fail(ErrorKind::Config, "unknown initial condition '" + spec.name + "' (perturbed_steady, uniform, tabulated)");
  require(std::abs(spec.amplitude) < 1.0, "perturbed_steady: |amplitude| must be below 1");
  const ScalarField rho_s = solve_steady(F, gamma, m).rho_s;
  const double lx = g.extent[0], ly = g.extent[1];
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j) {
      const std::size_t k = g.index(i, j);
      const double x = g.center(0, i) - g.origin[0];
      d.rho.data[k] = rho_s.data[k] * (1 + spec.amplitude * std::sin(2 * pi * spec.mode * x / lx));
      double u = spec.velocity_amplitude * std::sin(pi * x / lx);
      if (g.dim == 2) u *= std::sin(pi * (g.center(1, j) - g.origin[1]) / ly);
      d.mom.at(0, k) = u;
    }
  const double scale = m / integrate(d.rho);
  for (double& r : d.rho.data) r *= scale;
  for (std::size_t k = 0; k < g.cells(); ++k) d.mom.at(0, k) *= d.rho.data[k];
  return d;
}

}  // namespace barostat
