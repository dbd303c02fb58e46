#include <cmath>
#include <numbers>

#include "barostat/fields.hpp"
#include "doctest.h"

using namespace barostat;

TEST_CASE("integrate and mean of linear function") {
  const Grid g = Grid::line(256);
  const ScalarField f = ScalarField::sample(g, [](double x, double) { return x; });
  CHECK(integrate(f) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mean(f) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("2D integral of a product") {
  const Grid g = Grid::rect(64, 32, 2.0, 1.0);
  const ScalarField f = ScalarField::sample(g, [](double x, double y) { return x * y; });
  CHECK(integrate(f) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(g.volume() == doctest::Approx(2.0));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid::line(3), Error);
  CHECK_THROWS_AS(Grid::rect(8, 8, -1.0, 1.0), Error);
}

TEST_CASE("lp norms") {
  const Grid g = Grid::line(100);
  const ScalarField f(g, 2.0);
  CHECK(lp_norm(f, 2.0) == doctest::Approx(2.0));
  CHECK(lp_norm(f, kInf) == 2.0);
  CHECK_THROWS_AS(lp_norm(f, 0.5), Error);
}

namespace {

double lap_error(int n) {
  const double pi = std::numbers::pi;
  const Grid g = Grid::line(n);
  const ScalarField f = ScalarField::sample(g, [&](double x, double) { return std::cos(pi * x); });
  const ScalarField l = div(grad(f, Boundary::Even), Boundary::Even);
  double err = 0.0;
  for (int i = 2; i < n - 2; ++i)
    err = std::max(err, std::abs(l.data[i] + pi * pi * std::cos(pi * g.center(0, i))));
  return err;
}

}  // namespace

TEST_CASE("div of grad is second order in the interior") {
  const double ratio = lap_error(64) / lap_error(128);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("one-sided gradient is exact for quadratics") {
  const Grid g = Grid::line(16);
  const ScalarField f = ScalarField::sample(g, [](double x, double) { return x * x + 3 * x; });
  const VectorField d = grad(f);
  for (int i = 0; i < 16; ++i) CHECK(d.at(0, i) == doctest::Approx(2 * g.center(0, i) + 3).epsilon(1e-12));
}

TEST_CASE("dirichlet energy matches summation by parts with the odd laplacian") {
  const Grid g = Grid::rect(12, 10);
  VectorField v(g);
  for (std::size_t k = 0; k < v.data.size(); ++k) v.data[k] = std::sin(0.37 * k + 1.0);
  const VectorField l = lap(v, Boundary::Odd);
  double pairing = 0.0;
  for (std::size_t k = 0; k < v.data.size(); ++k) pairing += v.data[k] * l.data[k];
  pairing *= g.cell_volume();
  double interior = 0.0, wall = 0.0;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 10; ++j) {
        const double f = v.at(c, g.index(i, j));
        if (i + 1 < 12) interior += std::pow(v.at(c, g.index(i + 1, j)) - f, 2) / std::pow(g.h(0), 2);
        if (j + 1 < 10) interior += std::pow(v.at(c, g.index(i, j + 1)) - f, 2) / std::pow(g.h(1), 2);
        if (i == 0 || i == 11) wall += 4 * f * f / std::pow(g.h(0), 2);
        if (j == 0 || j == 9) wall += 4 * f * f / std::pow(g.h(1), 2);
      }
  interior *= g.cell_volume();
  wall *= g.cell_volume();
  CHECK(dirichlet_energy(v) == doctest::Approx(interior + 0.5 * wall).epsilon(1e-12));
  CHECK(dirichlet_energy(v) == doctest::Approx(-pairing).epsilon(1e-12));
}
