#include "barostat/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace barostat {

Grid Grid::line(int n, double length) {
  Grid g;
  g.dim = 1;
  g.n = {n, 1};
  g.extent = {length, 1.0};
  g.validate();
  return g;
}

Grid Grid::rect(int nx, int ny, double lx, double ly) {
  Grid g;
  g.dim = 2;
  g.n = {nx, ny};
  g.extent = {lx, ly};
  g.validate();
  return g;
}

void Grid::validate() const {
  require(dim == 1 || dim == 2, "grid: dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    require(n[a] >= 4, "grid: need at least 4 cells per axis");
    require(extent[a] > 0.0 && std::isfinite(extent[a]),
            "grid: extent must be positive");
  }
  if (dim == 1) require(n[1] == 1, "grid: 1D grid must have n[1] == 1");
}

double Grid::min_h() const {
  double h0 = h(0);
  return dim == 2 ? std::min(h0, h(1)) : h0;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h(a);
  return v;
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= extent[a];
  return v;
}

ScalarField::ScalarField(const Grid& g, std::vector<double> values)
    : grid(g), data(std::move(values)) {
  require(data.size() == g.cells(), "field: value count does not match grid");
}

double ScalarField::min() const { return *std::min_element(data.begin(), data.end()); }
double ScalarField::max() const { return *std::max_element(data.begin(), data.end()); }

bool ScalarField::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double x) { return std::isfinite(x); });
}

bool VectorField::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double x) { return std::isfinite(x); });
}

void GasParams::validate() const {
  require(gamma > 1.0, "gas: gamma must exceed 1");
  require(mu > 0.0, "gas: mu must be positive");
  require(2.0 * mu + 3.0 * lambda >= 0.0, "gas: need 2 mu + 3 lambda >= 0");
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double integrate(const ScalarField& f) {
  return pairwise_sum(f.data) * f.grid.cell_volume();
}

double mean(const ScalarField& f) { return integrate(f) / f.grid.volume(); }

namespace {

double lp_of_values(std::span<const double> mag, double p, double vol) {
  require(p >= 1.0, "lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : mag) m = std::max(m, std::abs(x));
    return m;
  }
  std::vector<double> pw(mag.size());
  for (std::size_t k = 0; k < mag.size(); ++k) pw[k] = std::pow(std::abs(mag[k]), p);
  return std::pow(pairwise_sum(pw) * vol, 1.0 / p);
}

// Geometry of one axis as seen from a flat cell index.
struct Axis {
  std::ptrdiff_t stride;
  int len;
  double h;
};

Axis axis_of(const Grid& g, int a) {
  return {a == 0 ? static_cast<std::ptrdiff_t>(g.n[1]) : 1, g.n[a], g.h(a)};
}

int position(const Grid& g, std::size_t k, int a) {
  return a == 0 ? static_cast<int>(k / g.n[1]) : static_cast<int>(k % g.n[1]);
}

double first_derivative(const double* f, const Axis& ax, int p, Boundary bc) {
  const std::ptrdiff_t s = ax.stride;
  if (p > 0 && p < ax.len - 1) return (f[s] - f[-s]) / (2.0 * ax.h);
  if (bc == Boundary::OneSided) {
    if (p == 0) return (-3.0 * f[0] + 4.0 * f[s] - f[2 * s]) / (2.0 * ax.h);
    return (3.0 * f[0] - 4.0 * f[-s] + f[-2 * s]) / (2.0 * ax.h);
  }
  const double ghost = bc == Boundary::Even ? f[0] : -f[0];
  if (p == 0) return (f[s] - ghost) / (2.0 * ax.h);
  return (ghost - f[-s]) / (2.0 * ax.h);
}

double second_derivative(const double* f, const Axis& ax, int p, Boundary bc) {
  const std::ptrdiff_t s = ax.stride;
  const double h2 = ax.h * ax.h;
  if (p > 0 && p < ax.len - 1) return (f[s] - 2.0 * f[0] + f[-s]) / h2;
  if (bc == Boundary::OneSided) {
    const std::ptrdiff_t d = p == 0 ? s : -s;
    return (2.0 * f[0] - 5.0 * f[d] + 4.0 * f[2 * d] - f[3 * d]) / h2;
  }
  const double ghost = bc == Boundary::Even ? f[0] : -f[0];
  const double inner = p == 0 ? f[s] : f[-s];
  return (inner - 2.0 * f[0] + ghost) / h2;
}

}  // namespace

double lp_norm(const ScalarField& f, double p) {
  return lp_of_values(f.data, p, f.grid.cell_volume());
}

double lp_norm(const VectorField& v, double p) {
  ScalarField m = magnitude_squared(v);
  for (double& x : m.data) x = std::sqrt(x);
  return lp_of_values(m.data, p, v.grid.cell_volume());
}

VectorField grad(const ScalarField& f, Boundary bc) {
  const Grid& g = f.grid;
  g.validate();
  VectorField out(g);
  for (int a = 0; a < g.dim; ++a) {
    const Axis ax = axis_of(g, a);
    auto comp = out.component(a);
    for (std::size_t k = 0; k < g.cells(); ++k)
      comp[k] = first_derivative(f.data.data() + k, ax, position(g, k, a), bc);
  }
  return out;
}

ScalarField div(const VectorField& v, Boundary bc) {
  const Grid& g = v.grid;
  g.validate();
  ScalarField out(g);
  for (int a = 0; a < g.dim; ++a) {
    const Axis ax = axis_of(g, a);
    const double* comp = v.component(a).data();
    for (std::size_t k = 0; k < g.cells(); ++k)
      out.data[k] += first_derivative(comp + k, ax, position(g, k, a), bc);
  }
  return out;
}

VectorField lap(const VectorField& v, Boundary bc) {
  const Grid& g = v.grid;
  g.validate();
  VectorField out(g);
  for (int c = 0; c < g.dim; ++c) {
    const double* comp = v.component(c).data();
    auto res = out.component(c);
    for (int a = 0; a < g.dim; ++a) {
      const Axis ax = axis_of(g, a);
      for (std::size_t k = 0; k < g.cells(); ++k)
        res[k] += second_derivative(comp + k, ax, position(g, k, a), bc);
    }
  }
  return out;
}

double dirichlet_energy(const VectorField& v) {
  const Grid& g = v.grid;
  std::vector<double> per_cell(g.cells(), 0.0);
  for (int c = 0; c < g.dim; ++c) {
    const double* comp = v.component(c).data();
    for (int a = 0; a < g.dim; ++a) {
      const Axis ax = axis_of(g, a);
      const double inv_h2 = 1.0 / (ax.h * ax.h);
      for (std::size_t k = 0; k < g.cells(); ++k) {
        const int p = position(g, k, a);
        const double* f = comp + k;
        double acc = 0.0;
        if (p == 0) acc += 2.0 * f[0] * f[0];  // wall face: half the ghost jump (2f)^2
        if (p < ax.len - 1) {
          const double d = f[ax.stride] - f[0];
          acc += d * d;
        } else {
          acc += 2.0 * f[0] * f[0];
        }
        per_cell[k] += acc * inv_h2;
      }
    }
  }
  return pairwise_sum(per_cell) * g.cell_volume();
}

ScalarField dot(const VectorField& a, const VectorField& b) {
  require(a.grid == b.grid, "dot: grid mismatch");
  ScalarField out(a.grid);
  for (int c = 0; c < a.grid.dim; ++c) {
    auto x = a.component(c);
    auto y = b.component(c);
    for (std::size_t k = 0; k < out.size(); ++k) out.data[k] += x[k] * y[k];
  }
  return out;
}

ScalarField magnitude_squared(const VectorField& v) { return dot(v, v); }

}  // namespace barostat
