#include <cmath>
#include <random>

#include "barostat/entropy.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace barostat;

TEST_CASE("theta values") {
  CHECK(theta_for(2.0) == doctest::Approx(1.0 / 3.0));
  CHECK(theta_for(5.0 / 3.0) == doctest::Approx(1.0 / 9.0));
  CHECK(theta_for(6.0) == doctest::Approx(0.5));
}

TEST_CASE("G matches quadrature of its defining integral") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.01, 10.0);
  double worst = 0.0;
  for (double gamma : {5.0 / 3.0, 2.0, 3.0})
    for (int t = 0; t < 2000; ++t) {
      const double r = U(rng), s = U(rng);
      const double ref = oracle::g_by_quadrature(r, s, gamma);
      worst = std::max(worst, std::abs(relative_potential(r, s, gamma) - ref) / ref);
    }
  CHECK(worst <= 1e-10);
}

TEST_CASE("G for gamma = 2 is a square") {
  CHECK(relative_potential(3.0, 1.0, 2.0) == doctest::Approx(4.0));
  CHECK(relative_potential(1.0 + 1e-9, 1.0, 2.0) == doctest::Approx(1e-18).epsilon(1e-6));
  CHECK(relative_potential(0.0, 2.0, 2.0) == doctest::Approx(4.0));
  CHECK(relative_potential(2.0, 2.0, 1.4) == 0.0);
  CHECK_THROWS_AS(relative_potential(1.0, 0.0, 2.0), Error);
  CHECK(relative_potential_unchecked(2.0, 0.0, 2.0) == doctest::Approx(4.0));
}

TEST_CASE("pow_diff is accurate near equality") {
  CHECK(pow_diff(1.0 + 1e-12, 1.0, 1.0 / 3.0) == doctest::Approx(1e-12 / 3).epsilon(1e-3));
  CHECK(pow_diff(0.0, 4.0, 0.5) == -2.0);
}

TEST_CASE("Taylor expansion in rho^theta is exact") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.01, 10.0);
  for (double theta : {1.0 / 9.0, 1.0 / 3.0, 0.5}) {
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const double r = U(rng), s = U(rng);
      worst = std::max(worst, check_taylor(r, s, theta) / std::max({r, s, 1.0}));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("entropy inequality scan for gamma = 2") {
  const auto rho = density_samples(8.0, 20000);
  const std::vector<double> levels{0.5, 1.0, 2.0};
  const X2Result r = check_x2(rho, levels, 2.0, 1.0 / 3.0);
  CHECK(r.rhs_nonnegative);
  CHECK(r.c0_est > 0.0);
  CHECK(r.sandwich_violations == 0);
  CHECK(r.holds);
}

TEST_CASE("relative energy") {
  const Grid g = Grid::line(10);
  ScalarField rho(g, 2.0), rs(g, 1.0);
  VectorField u(g, 3.0);
  CHECK(relative_energy(rho, u, rs, GasParams{}) == doctest::Approx(0.5 * 2 * 9 + 1));
  rho.data[3] = -1.0;
  CHECK_THROWS_AS(relative_energy(rho, u, rs, GasParams{}), Error);
}

TEST_CASE("pressure difference constant for a uniform perturbation") {
  const Grid g = Grid::line(20);
  SteadyState s;
  s.rho_s = ScalarField(g, 1.0);
  const X39Result r = check_x39(ScalarField(g, 2.0), s, GasParams{});
  CHECK(r.lhs == doctest::Approx(3.0));
  CHECK(r.norm == doctest::Approx(1.0));
  CHECK(r.c_hat == doctest::Approx(3.0));
  CHECK(r.ratios.back() == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(r.holds);
}

TEST_CASE("mean-value bound on a mass-matched perturbation") {
  const Grid g = Grid::line(128);
  SteadyState s;
  s.rho_s = ScalarField::sample(g, [](double x, double) { return 1.0 + 0.25 * std::cos(3.14159265358979 * x); });
  const ScalarField rho = ScalarField::sample(g, [&](double x, double) {
    return (1.0 + 0.25 * std::cos(3.14159265358979 * x)) + 0.3 * std::cos(2 * 3.14159265358979 * x);
  });
  const X16Result r = check_x16_x17(rho, s, GasParams{});
  CHECK(r.holds);
  CHECK(r.c16 > 0.0);
  CHECK(r.c17 > 0.0);
}
