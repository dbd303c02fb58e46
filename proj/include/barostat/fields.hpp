#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "barostat/error.hpp"

namespace barostat {

/// Uniform cell-centered mesh of an interval (dim 1) or a rectangle (dim 2).
///
/// Cells are stored with axis 0 slowest: index(i, j) = i * n[1] + j. In 1D
/// the unused axis has n[1] = 1 and extent[1] = 1, which keeps the indexing
/// and the snapshot layout uniform.
struct Grid {
  int dim = 1;
  std::array<int, 2> n{4, 1};
  std::array<double, 2> extent{1.0, 1.0};
  std::array<double, 2> origin{0.0, 0.0};

  static Grid line(int n, double length = 1.0);
  static Grid rect(int nx, int ny, double lx = 1.0, double ly = 1.0);

  /// Throws InvalidArgument unless dim is 1 or 2, n >= 4 per active axis and
  /// every extent is positive.
  void validate() const;

  double h(int axis) const { return extent[axis] / n[axis]; }
  double min_h() const;
  std::size_t cells() const {
    return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]);
  }
  double cell_volume() const;
  double volume() const;
  double center(int axis, int i) const {
    return origin[axis] + (i + 0.5) * h(axis);
  }
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) * n[1] + j;
  }

  bool operator==(const Grid&) const = default;
};

struct ScalarField {
  Grid grid;
  std::vector<double> data;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0)
      : grid(g), data(g.cells(), fill) {}
  ScalarField(const Grid& g, std::vector<double> values);

  /// Samples fn(x, y) at cell centers (y = 0 in 1D).
  template <class Fn>
  static ScalarField sample(const Grid& g, Fn&& fn) {
    ScalarField f(g);
    for (int i = 0; i < g.n[0]; ++i)
      for (int j = 0; j < g.n[1]; ++j)
        f.data[g.index(i, j)] =
            fn(g.center(0, i), g.dim == 2 ? g.center(1, j) : 0.0);
    return f;
  }

  std::size_t size() const { return data.size(); }
  double& operator[](std::size_t k) { return data[k]; }
  double operator[](std::size_t k) const { return data[k]; }
  double min() const;
  double max() const;
  bool all_finite() const;
};

/// dim components per cell, stored component-major.
struct VectorField {
  Grid grid;
  std::vector<double> data;

  VectorField() = default;
  explicit VectorField(const Grid& g, double fill = 0.0)
      : grid(g), data(g.cells() * g.dim, fill) {}

  std::span<double> component(int c) {
    return {data.data() + c * grid.cells(), grid.cells()};
  }
  std::span<const double> component(int c) const {
    return {data.data() + c * grid.cells(), grid.cells()};
  }
  double& at(int c, std::size_t k) { return data[c * grid.cells() + k]; }
  double at(int c, std::size_t k) const { return data[c * grid.cells() + k]; }
  bool all_finite() const;
};

/// Barotropic gas with P = rho^gamma.
struct GasParams {
  double gamma = 2.0;
  double mu = 1.0;
  double lambda = 0.0;

  /// Enforces gamma > 1, mu > 0 and 2 mu + 3 lambda >= 0.
  void validate() const;
  /// The weak-solution theory needs gamma > 3/2; decay runs flag this.
  bool weak_solution_range() const { return gamma > 1.5; }
};

/// Ghost-value policy used by the difference operators at the boundary.
enum class Boundary {
  Even,      ///< mirror copy, zero normal derivative
  Odd,       ///< mirror negation, value zero on the wall
  OneSided,  ///< second-order one-sided stencils, no ghosts
};

/// Deterministic pairwise-tree sum.
double pairwise_sum(std::span<const double> v);

/// Midpoint quadrature of f over the grid.
double integrate(const ScalarField& f);
double mean(const ScalarField& f);

/// (sum |f|^p vol)^(1/p), or max |f| for p = infinity. Throws for p < 1.
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField& v, double p);
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Second-order central differences; see Boundary for the wall treatment.
VectorField grad(const ScalarField& f, Boundary bc = Boundary::OneSided);
ScalarField div(const VectorField& v, Boundary bc = Boundary::Odd);
/// Componentwise Laplacian.
VectorField lap(const VectorField& v, Boundary bc = Boundary::Odd);

/// Sum over interior faces of |v_R - v_L|^2 / h^2 plus 2 |v|^2 / h^2 per wall
/// face (the wall sits half a cell from the center), times the cell volume.
/// Equals -<v, lap(v, Boundary::Odd)> exactly.
double dirichlet_energy(const VectorField& v);

ScalarField dot(const VectorField& a, const VectorField& b);
ScalarField magnitude_squared(const VectorField& v);

}  // namespace barostat
