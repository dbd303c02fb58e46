#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "barostat/equilibrium.hpp"
#include "doctest.h"

using namespace barostat;

namespace {

ScalarField linear_potential(int n, double shift = 0.0) {
  return ScalarField::sample(Grid::line(n), [&](double x, double) { return x + shift; });
}

// Closed-form S(k) for F = x on [0,1] and gamma = 3, valid for k <= 0.
double mass_gamma3(double k) {
  const double c = std::sqrt(2.0 / 3.0);
  return c * (2.0 / 3.0) * (std::pow(1.0 - k, 1.5) - std::pow(-k, 1.5));
}

}  // namespace

TEST_CASE("positive equilibrium for F = x, gamma = 2, m = 1") {
  const ScalarField F = linear_potential(256);
  const SteadyState s = solve_steady(F, 2.0, 1.0);
  CHECK(std::abs(s.k0 + 1.5) <= 1e-10);
  CHECK(s.regime == Regime::UniquePositive);
  CHECK(steady_residual(s, F, 2.0) <= 1e-10);
  CHECK(integrate(s.rho_s) == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 256; ++i)
    CHECK(s.rho_s.data[i] == doctest::Approx((F.grid.center(0, i) + 1.5) / 2).epsilon(1e-12));
}

TEST_CASE("vacuum equilibrium for m = 0.125") {
  const ScalarField F = linear_potential(256);
  const SteadyState s = solve_steady(F, 2.0, 0.125);
  CHECK(std::abs(s.k0 - (1.0 - 1.0 / std::sqrt(2.0))) <= 1e-8);
  CHECK(s.regime == Regime::VacuumInterior);
  int vacuum = 0;
  for (double r : s.rho_s.data) vacuum += r == 0.0;
  CHECK(vacuum > 64);
  CHECK(s.rho_s.min() == 0.0);
}

TEST_CASE("mass threshold and shift invariance") {
  const double t0 = mass_threshold(linear_potential(256), 2.0);
  CHECK(std::abs(t0 - 0.25) <= 1e-10);
  const double t1 = mass_threshold(linear_potential(256, 17.25), 2.0);
  CHECK(std::abs(t1 - t0) <= 1e-12);
}

TEST_CASE("threshold regime is vacuum on the boundary") {
  const ScalarField F = linear_potential(128);
  const SteadyState s = solve_steady(F, 2.0, 0.25);
  CHECK(s.regime == Regime::VacuumBoundary);
  CHECK(std::abs(s.k0) <= 1e-9);
}

TEST_CASE("gamma = 3 level agrees with a closed-form root") {
  const double m = 0.7;
  boost::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      [&](double k) { return mass_gamma3(k) - m; }, -10.0, 0.0,
      boost::math::tools::eps_tolerance<double>(50), iters);
  const double k_ref = 0.5 * (bracket.first + bracket.second);
  const SteadyState s = solve_steady(linear_potential(512), 3.0, m);
  CHECK(s.k0 == doctest::Approx(k_ref).epsilon(1e-9));
}

TEST_CASE("S is nonincreasing and vanishes at sup F") {
  const ScalarField F = ScalarField::sample(Grid::line(200), [](double x, double) { return std::sin(5 * x); });
  double prev = mass_at_level(F, 1.7, -3.0);
  for (double k = -2.9; k < 1.2; k += 0.1) {
    const double m = mass_at_level(F, 1.7, k);
    CHECK(m <= prev);
    prev = m;
  }
  CHECK(mass_at_level(F, 1.7, potential_sup(F)) == 0.0);
}

TEST_CASE("double well below threshold has a continuum of equilibria") {
  const ScalarField F = ScalarField::sample(Grid::line(256), [](double x, double) {
    return std::min(std::abs(x - 0.25), std::abs(x - 0.75));
  });
  const RegimeReport low = classify_regime(F, 2.0, 0.001);
  CHECK(low.disconnected_level_set);
  CHECK_FALSE(low.is_unique);
  CHECK(low.vacuum_present);
  const SteadyState s = solve_steady(F, 2.0, 0.001);
  CHECK(s.regime == Regime::ContinuumRisk);
  CHECK(classify_regime(F, 2.0, 10.0).threshold_relation == ThresholdRelation::Above);
}

TEST_CASE("2D equilibrium conserves mass and is positive above threshold") {
  const Grid g = Grid::rect(48, 32, 1.0, 0.5);
  const ScalarField F = ScalarField::sample(g, [](double x, double y) { return x + 2 * y; });
  const double thr = mass_threshold(F, 2.0);
  // F ranges over [0, 2] on [0,1]x[0,.5]; S(0) = int (x + 2y)/2 = 0.25.
  CHECK(thr == doctest::Approx(0.25).epsilon(1e-12));
  const SteadyState s = solve_steady(F, 2.0, 1.0);
  CHECK(s.regime == Regime::UniquePositive);
  CHECK(integrate(s.rho_s) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(steady_residual(s, F, 2.0) <= 1e-10);
}

TEST_CASE("invalid inputs") {
  const ScalarField F = linear_potential(32);
  CHECK_THROWS_AS(solve_steady(F, 2.0, 0.0), Error);
  CHECK_THROWS_AS(solve_steady(F, 1.0, 1.0), Error);
}
