#include <cmath>
#include <numbers>

#include "barostat/nssolver.hpp"
#include "doctest.h"

using namespace barostat;

namespace {

const double pi = std::numbers::pi;

SimConfig cosine_run(int n, double amp, double t_end) {
  SimConfig c;
  c.gp = {2.0, 0.02, 0.0};
  c.grid = Grid::line(n);
  c.F = ScalarField::sample(c.grid, [](double x, double) { return 0.5 * std::cos(pi * x); });
  const SteadyState ss = solve_steady(c.F, 2.0, 1.0);
  c.rho0 = ss.rho_s;
  for (int i = 0; i < n; ++i) c.rho0.data[i] *= 1 + amp * std::sin(2 * pi * c.grid.center(0, i));
  const double m = integrate(c.rho0);
  for (double& r : c.rho0.data) r /= m;
  c.mom0 = VectorField(c.grid);
  c.t_end = t_end;
  c.cfl = 0.8;
  c.record_dt = 0.05;
  return c;
}

// rho = 1 + 0.1 cos(pi x) cos t, u = 0.1 sin(pi x) cos t with F = 0, gamma = 2.
double rho_mms(double x, double t) { return 1 + 0.1 * std::cos(pi * x) * std::cos(t); }
double u_mms(double x, double t) { return 0.1 * std::sin(pi * x) * std::cos(t); }

double mms_error(int n, TimeScheme scheme) {
  const double mu = 0.02, T = 0.5;
  SimConfig c;
  c.gp = {2.0, mu, 0.0};
  c.grid = Grid::line(n);
  c.F = ScalarField(c.grid, 0.0);
  c.rho0 = ScalarField::sample(c.grid, [](double x, double) { return rho_mms(x, 0); });
  c.mom0 = VectorField(c.grid);
  for (int i = 0; i < n; ++i) {
    const double x = c.grid.center(0, i);
    c.mom0.data[i] = rho_mms(x, 0) * u_mms(x, 0);
  }
  c.scheme = scheme;
  c.forcing = [mu](double t, const Grid& g, ScalarField& sr, VectorField& sm) {
    for (int i = 0; i < g.n[0]; ++i) {
      const double x = g.center(0, i), C = std::cos(pi * x), S = std::sin(pi * x);
      const double ct = std::cos(t), st = std::sin(t);
      const double r = 1 + 0.1 * C * ct, rt = -0.1 * C * st, rx = -0.1 * pi * S * ct;
      const double u = 0.1 * S * ct, ut = -0.1 * S * st, ux = 0.1 * pi * C * ct;
      const double uxx = -0.1 * pi * pi * S * ct;
      sr.data[i] = rt + rx * u + r * ux;
      // (rho u)_t + (rho u^2 + rho^2)_x - 2 mu u_xx
      sm.data[i] = rt * u + r * ut + rx * u * u + 2 * r * u * ux + 2 * r * rx - 2 * mu * uxx;
    }
  };
  prepare_balance(c);
  State s{0.0, c.rho0, c.mom0};
  while (s.t < T) s = step(s, c, std::min(stable_dt(s, c), T - s.t));
  double e = 0.0;
  for (int i = 0; i < n; ++i) e += std::pow(s.rho.data[i] - rho_mms(c.grid.center(0, i), T), 2) / n;
  return std::sqrt(e);
}

}  // namespace

TEST_CASE("uniform state with constant potential is a fixed point") {
  SimConfig c;
  c.gp = {1.4, 0.1, 0.05};
  c.grid = Grid::line(32);
  c.F = ScalarField(c.grid, 2.0);
  c.rho0 = ScalarField(c.grid, 1.3);
  c.mom0 = VectorField(c.grid);
  for (FluxKind flux : {FluxKind::Fluctuation, FluxKind::Rusanov}) {
    c.flux = flux;
    prepare_balance(c);
    State s{0.0, c.rho0, c.mom0};
    for (int k = 0; k < 50; ++k) s = step(s, c);
    for (double r : s.rho.data) CHECK(r == 1.3);
    for (double m : s.mom.data) CHECK(m == 0.0);
  }
}

TEST_CASE("a step conserves mass") {
  SimConfig c = cosine_run(128, 0.2, 1.0);
  for (int i = 0; i < 128; ++i) c.mom0.data[i] = 0.3 * std::sin(pi * c.grid.center(0, i)) * std::cos(3 * i);
  prepare_balance(c);
  for (TimeScheme scheme : {TimeScheme::Euler, TimeScheme::Heun}) {
    c.scheme = scheme;
    State s{0.0, c.rho0, c.mom0};
    const double m0 = integrate(s.rho);
    for (int k = 0; k < 20; ++k) {
      s = step(s, c);
      CHECK(std::abs(integrate(s.rho) - m0) <= 1e-14 * m0);
    }
  }
}

TEST_CASE("equilibrium is held to second order over 1000 steps") {
  for (int n : {64, 128}) {
    SimConfig c = cosine_run(n, 0.0, 1.0);
    const SteadyState ss = solve_steady(c.F, 2.0, 1.0);
    c.rho0 = ss.rho_s;
    prepare_balance(c);
    State s{0.0, c.rho0, c.mom0};
    for (int k = 0; k < 1000; ++k) s = step(s, c);
    const double h2 = std::pow(c.grid.h(0), 2);
    double dr = 0.0, dm = 0.0;
    for (int i = 0; i < n; ++i) {
      dr = std::max(dr, std::abs(s.rho.data[i] - ss.rho_s.data[i]));
      dm = std::max(dm, std::abs(s.mom.data[i]));
    }
    CHECK(dr <= h2);
    CHECK(dm <= h2);
  }
}

TEST_CASE("manufactured solution converges at first order") {
  for (TimeScheme scheme : {TimeScheme::Euler, TimeScheme::Heun}) {
    const double e64 = mms_error(64, scheme), e128 = mms_error(128, scheme);
    CHECK(e128 < 1e-3);
    CHECK(e64 / e128 == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("symmetric data stay symmetric") {
  SimConfig c;
  c.gp = {2.0, 0.05, 0.0};
  c.grid = Grid::line(100);
  c.F = ScalarField::sample(c.grid, [](double x, double) { return std::cos(2 * pi * x); });
  c.rho0 = ScalarField::sample(c.grid, [](double x, double) { return 1 + 0.2 * std::cos(4 * pi * x); });
  c.mom0 = VectorField(c.grid);
  for (int i = 0; i < 100; ++i) c.mom0.data[i] = 0.1 * std::sin(2 * pi * c.grid.center(0, i));
  prepare_balance(c);
  State s{0.0, c.rho0, c.mom0};
  for (int k = 0; k < 500; ++k) s = step(s, c);
  double asym = 0.0;
  for (int i = 0; i < 100; ++i) {
    asym = std::max(asym, std::abs(s.rho.data[i] - s.rho.data[99 - i]));
    asym = std::max(asym, std::abs(s.mom.data[i] + s.mom.data[99 - i]));
  }
  CHECK(asym <= 1e-12);
}

TEST_CASE("simulate: energy inequality, mass and sampling") {
  SimConfig c = cosine_run(128, 0.05, 2.0);
  const TrajectoryRecord rec = simulate(c);
  REQUIRE(rec.rows.size() == 41);
  CHECK(rec.rows.front().t == 0.0);
  CHECK(rec.rows.back().t == 2.0);
  const auto& r0 = rec.rows.front();
  for (const auto& r : rec.rows) {
    CHECK(std::abs(r.mass / r0.mass - 1) <= 1e-12);
    CHECK(r.e_rel >= 0.0);
    CHECK(r.e_rel + r.dissipation_cum <= r0.e_rel * 1.001);
    CHECK(r.e_paper + r.dissipation_cum <= r0.e_paper + 1e-3 * r0.e_rel);
  }
  CHECK(rec.rows.back().e_rel < 0.5 * r0.e_rel);
  CHECK(rec.floored_mass == 0.0);
  CHECK(rec.lyapunov_recorded);
}

TEST_CASE("simulate from the equilibrium stays near zero relative energy") {
  SimConfig c = cosine_run(64, 0.0, 1.0);
  const TrajectoryRecord rec = simulate(c);
  for (const auto& r : rec.rows) CHECK(r.e_rel <= 1e-8);
}

TEST_CASE("relaxed reference") {
  SimConfig c = cosine_run(64, 0.05, 0.5);
  c.reference = Reference::Relaxed;
  c.relax_time = 2.0;
  const TrajectoryRecord rec = simulate(c);
  REQUIRE(rec.e_rel_analytic.size() == rec.rows.size());
  CHECK(rec.rows.front().e_rel > 0.0);
  CHECK(std::abs(rec.rows.front().e_rel / rec.e_rel_analytic.front() - 1) < 0.05);
}

TEST_CASE("2D run conserves mass and dissipates energy") {
  SimConfig c;
  c.gp = {2.0, 0.05, 0.01};
  c.grid = Grid::rect(24, 16, 1.0, 0.75);
  c.F = ScalarField::sample(c.grid, [](double x, double y) { return 0.5 * std::cos(pi * x) + 0.2 * y; });
  c.rho0 = ScalarField::sample(c.grid, [](double x, double y) {
    return 1 + 0.05 * std::sin(2 * pi * x) * std::cos(pi * y / 0.75);
  });
  c.mom0 = VectorField(c.grid);
  c.t_end = 0.3;
  c.record_dt = 0.1;
  c.scheme = TimeScheme::Heun;
  const TrajectoryRecord rec = simulate(c);
  REQUIRE(rec.rows.size() == 4);
  const auto& r0 = rec.rows.front();
  for (const auto& r : rec.rows) {
    CHECK(std::abs(r.mass / r0.mass - 1) <= 1e-12);
    CHECK(r.e_rel + r.dissipation_cum <= r0.e_rel * 1.001);
  }
  CHECK(rec.final_state.rho.all_finite());
}

TEST_CASE("configuration errors") {
  SimConfig c = cosine_run(32, 0.05, 1.0);
  c.cfl = 1.5;
  CHECK_THROWS_AS(simulate(c), Error);
  c.cfl = 0.5;
  c.t_end = 0.0;
  CHECK_THROWS_AS(simulate(c), Error);
  c.t_end = 1.0;
  c.rho0 = ScalarField(c.grid, 0.0);
  CHECK_THROWS_AS(simulate(c), Error);
  c = cosine_run(32, 0.05, 1.0);
  c.max_steps = 3;
  CHECK_THROWS_AS(simulate(c), Error);
}
