#include <cmath>
#include <numbers>
#include <random>

#include "barostat/bogovskii.hpp"
#include "doctest.h"

using namespace barostat;

namespace {

const double pi = std::numbers::pi;

double sin_error(int n) {
  const Grid g = Grid::line(n);
  const ScalarField f = ScalarField::sample(g, [](double x, double) { return std::sin(2 * pi * x); });
  const BogovskiiSolve b = bogovskii(f);
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    err = std::max(err, std::abs(b.v.at(0, i) - (1 - std::cos(2 * pi * g.center(0, i))) / (2 * pi)));
  return err;
}

// Discrete H^1 energy of face data, written out pair by pair: interior face
// pairs, Dirichlet wall faces at zero, and odd ghosts half a cell outside.
double face_energy(const Grid& g, const std::vector<double>& fx, const std::vector<double>& fy) {
  const int nx = g.n[0], ny = g.n[1];
  const double ax = 1 / (g.h(0) * g.h(0)), ay = 1 / (g.h(1) * g.h(1));
  double e = 0.0;
  auto U = [&](int i, int j) { return fx[i * ny + j]; };
  auto V = [&](int i, int j) { return fy[i * (ny + 1) + j]; };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) e += ax * std::pow(U(i + 1, j) - U(i, j), 2);
  for (int i = 1; i < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) e += ay * std::pow(U(i, j + 1) - U(i, j), 2);
    e += ay * 4 * (U(i, 0) * U(i, 0) + U(i, ny - 1) * U(i, ny - 1)) / 2;
  }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) e += ay * std::pow(V(i, j + 1) - V(i, j), 2);
  for (int j = 1; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) e += ax * std::pow(V(i + 1, j) - V(i, j), 2);
    e += ax * 4 * (V(0, j) * V(0, j) + V(nx - 1, j) * V(nx - 1, j)) / 2;
  }
  return e;
}

}  // namespace

TEST_CASE("zero input gives zero output") {
  const BogovskiiSolve b = bogovskii(ScalarField(Grid::rect(8, 8)));
  for (double x : b.face_x) CHECK(x == 0.0);
  for (double x : b.face_y) CHECK(x == 0.0);
}

TEST_CASE("1D antiderivative of sin 2 pi x") {
  CHECK(sin_error(256) <= 5e-4);
  CHECK(sin_error(128) / sin_error(256) == doctest::Approx(4.0).epsilon(0.15));
  const Grid g = Grid::line(256);
  const BogovskiiSolve b = bogovskii(ScalarField::sample(g, [](double x, double) { return std::sin(2 * pi * x); }));
  CHECK(b.face_x.front() == 0.0);
  CHECK(b.face_x.back() == 0.0);
  CHECK(b.div_residual <= 1e-8);
}

TEST_CASE("non mean-zero input is rejected") {
  CHECK_THROWS_AS(bogovskii(ScalarField(Grid::line(16), 1.0)), Error);
}

TEST_CASE("linearity in 1D and 2D") {
  std::mt19937_64 rng(3);
  for (const Grid& g : {Grid::line(64), Grid::rect(20, 16)}) {
    const ScalarField f = random_smooth_field(g, rng), h = random_smooth_field(g, rng);
    ScalarField comb(g);
    for (std::size_t k = 0; k < comb.size(); ++k) comb.data[k] = 2.5 * f.data[k] - 0.75 * h.data[k];
    const BogovskiiSolve bf = bogovskii(f), bh = bogovskii(h), bc = bogovskii(comb);
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < bc.face_x.size(); ++k) {
      worst = std::max(worst, std::abs(bc.face_x[k] - (2.5 * bf.face_x[k] - 0.75 * bh.face_x[k])));
      scale = std::max(scale, std::abs(bc.face_x[k]));
    }
    CHECK(worst <= 1e-10 * scale);
  }
}

TEST_CASE("2D solve: divergence, wall values, minimal energy") {
  std::mt19937_64 rng(5);
  const Grid g = Grid::rect(24, 18, 1.0, 0.75);
  const ScalarField f = random_smooth_field(g, rng);
  const BogovskiiSolve b = bogovskii(f);
  CHECK(b.div_residual <= 1e-8);
  const int nx = 24, ny = 18;
  for (int j = 0; j < ny; ++j) {
    CHECK(b.face_x[j] == 0.0);
    CHECK(b.face_x[nx * ny + j] == 0.0);
  }
  for (int i = 0; i < nx; ++i) {
    CHECK(b.face_y[i * (ny + 1)] == 0.0);
    CHECK(b.face_y[i * (ny + 1) + ny] == 0.0);
  }
  // Divergence-free perturbation from a corner stream function vanishing on
  // the walls; the minimizer is energy-orthogonal to it.
  std::vector<double> psi((nx + 1) * (ny + 1), 0.0);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 1; i < nx; ++i)
    for (int j = 1; j < ny; ++j) psi[i * (ny + 1) + j] = U(rng);
  std::vector<double> wx(b.face_x.size(), 0.0), wy(b.face_y.size(), 0.0);
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j < ny; ++j)
      wx[i * ny + j] = (psi[i * (ny + 1) + j + 1] - psi[i * (ny + 1) + j]) / g.h(1);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j <= ny; ++j)
      wy[i * (ny + 1) + j] = -(psi[(i + 1) * (ny + 1) + j] - psi[i * (ny + 1) + j]) / g.h(0);
  const ScalarField dw = face_divergence(g, wx, wy);
  CHECK(lp_norm(dw, kInf) <= 1e-9);
  std::vector<double> px = b.face_x, py = b.face_y, mx = b.face_x, my = b.face_y;
  for (std::size_t k = 0; k < px.size(); ++k) { px[k] += wx[k]; mx[k] -= wx[k]; }
  for (std::size_t k = 0; k < py.size(); ++k) { py[k] += wy[k]; my[k] -= wy[k]; }
  const double inner = (face_energy(g, px, py) - face_energy(g, mx, my)) / 4;
  const double ev = face_energy(g, b.face_x, b.face_y), ew = face_energy(g, wx, wy);
  CHECK(std::abs(inner) <= 1e-8 * std::sqrt(ev * ew));
}

TEST_CASE("norm scan is stable under refinement and homogeneous") {
  const NormScan a = bogovskii_norm_scan(Grid::line(128), 2.0, 100, 9);
  const NormScan b = bogovskii_norm_scan(Grid::line(256), 2.0, 100, 9);
  CHECK(std::abs(a.w1p_worst / b.w1p_worst - 1) <= 0.1);
  CHECK(a.div_form_worst == doctest::Approx(1.0).epsilon(1e-9));
  const NormScan c = bogovskii_norm_scan(Grid::rect(16, 16), 2.0, 10, 9);
  CHECK(std::isfinite(c.div_form_worst));
  CHECK(c.div_form_worst > 0.0);
  CHECK_THROWS_AS(bogovskii_norm_scan(Grid::line(16), 2.0, 5), Error);

  std::mt19937_64 rng(1);
  const ScalarField f = random_smooth_field(Grid::rect(16, 12), rng);
  ScalarField f10 = f;
  for (double& x : f10.data) x *= 10;
  CHECK(bogovskii(f10).h1_ratio == doctest::Approx(bogovskii(f).h1_ratio).epsilon(1e-10));
}

TEST_CASE("mollifier: constants, contraction, mass") {
  const Grid g = Grid::rect(40, 30);
  const double eps = 4.5 * g.h(0);
  const ScalarField c(g, 3.0);
  const ScalarField mc = mollify(c, eps);
  for (int i = 5; i < 35; ++i)
    for (int j = 5; j < 25; ++j) CHECK(mc.data[g.index(i, j)] == doctest::Approx(3.0).epsilon(1e-14));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int t = 0; t < 100; ++t) {
    ScalarField f(g);
    for (double& x : f.data) x = U(rng);
    CHECK(lp_norm(mollify(f, eps), 2.0) <= lp_norm(f, 2.0));
    const ScalarField ext = mollify_extended(f, eps);
    CHECK(std::abs(integrate(ext) - integrate(f)) <= 1e-12 * lp_norm(f, 1.0));
  }
}

TEST_CASE("mollifier converges for smooth data") {
  const Grid g = Grid::line(1024);
  const ScalarField f = ScalarField::sample(g, [](double x, double) { return std::pow(std::sin(pi * x), 2); });
  auto err = [&](double eps) {
    ScalarField d = mollify(f, eps);
    for (std::size_t k = 0; k < d.size(); ++k) d.data[k] -= f.data[k];
    return lp_norm(d, 2.0);
  };
  double prev = err(0.08);
  for (double eps : {0.04, 0.02, 0.01}) {
    const double e = err(eps);
    CHECK(prev / e >= 2.0 / 3.0);
    CHECK(prev / e <= 6.0);
    prev = e;
  }
  ScalarField same = mollify(f, 0.5 * g.h(0));
  CHECK(same.data == f.data);
}

TEST_CASE("commutator for constant density equals c (div u - [div u]_eps)") {
  const Grid g = Grid::line(256);
  const ScalarField rho(g, 2.0);
  VectorField u(g);
  for (int i = 0; i < 256; ++i) u.at(0, i) = std::sin(pi * g.center(0, i)) * std::cos(3 * g.center(0, i));
  const double theta = 1.0 / 3.0, eps = 6 * g.h(0);
  const CommutatorField r = commutator_residual(rho, u, theta, eps);
  const ScalarField du = div(u, Boundary::Odd);
  const ScalarField mdu = mollify(du, eps);
  const double c = std::pow(2.0, theta);
  for (std::size_t k = 0; k < r.r.size(); ++k)
    if (r.mask[k]) CHECK(r.r.data[k] == doctest::Approx(c * (du.data[k] - mdu.data[k])).epsilon(1e-9));
}

TEST_CASE("commutator vanishes for constant velocity away from the wall") {
  const Grid g = Grid::rect(48, 40);
  const ScalarField rho = ScalarField::sample(g, [](double x, double y) { return 1 + 0.5 * std::sin(3 * x + y); });
  VectorField u(g);
  for (std::size_t k = 0; k < g.cells(); ++k) { u.at(0, k) = 0.7; u.at(1, k) = -0.2; }
  const CommutatorField r = commutator_residual(rho, u, 0.5, 4 * g.h(0));
  CHECK(commutator_norm(r, 2.0) <= 1e-12);
}

TEST_CASE("commutator decreases along a dyadic eps sequence") {
  const Grid g = Grid::rect(128, 128);
  const ScalarField rho = ScalarField::sample(g, [](double x, double y) { return 1 + 0.4 * std::cos(2 * pi * x) * std::sin(pi * y); });
  VectorField u(g);
  for (int i = 0; i < 128; ++i)
    for (int j = 0; j < 128; ++j) {
      const double x = g.center(0, i), y = g.center(1, j);
      u.at(0, g.index(i, j)) = std::sin(pi * x) * std::sin(2 * pi * y);
      u.at(1, g.index(i, j)) = std::sin(2 * pi * x) * std::sin(pi * y);
    }
  const double h = g.h(0);
  std::vector<double> norms;
  for (double e : {8 * h, 4 * h, 2 * h}) norms.push_back(commutator_norm(commutator_residual(rho, u, 1.0 / 3.0, e, 8 * h), 2.0));
  CHECK(norms[1] < norms[0]);
  CHECK(norms[2] < norms[1]);
  CHECK(norms[2] <= 0.1 * norms[0]);
  CHECK_THROWS_AS(commutator_residual(rho, u, 1.0 / 3.0, 0.6), Error);
}

TEST_CASE("commutator bound scan") {
  const CommutatorBound b = commutator_bound_scan(Grid::line(256), 1.0 / 3.0, 8.0 / 256, 4.0, 4.0, 20, 4);
  CHECK(b.c_hat > 0.0);
  CHECK(b.worst_excess <= 0.0);
}
