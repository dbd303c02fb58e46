#pragma once

#include <string>

#include "barostat/equilibrium.hpp"
#include "barostat/nssolver.hpp"

namespace barostat {

/// Named potentials. With xi = x / Lx:
///   constant    F = value
///   linear      F = offset + slope x (+ slope_y y in 2D)
///   cosine      F = A cos(k pi xi)
///   doublewell  F = A sin^2(2 pi xi), two separated maxima
///   tabulated   field `field` of the snapshot at `path`
struct PotentialSpec {
  std::string name = "cosine";
  double value = 0.0;
  double offset = 0.0;
  double slope = 1.0;
  double slope_y = 0.0;
  double amplitude = 0.5;
  double k = 1.0;
  std::string path;
  std::string field = "F";
};

/// Throws Config for an unknown name; tabulated potentials bring their own grid.
ScalarField make_potential(const PotentialSpec& spec, const Grid& g);

/// Initial conditions:
///   perturbed_steady  rho0 = rho_s (1 + amplitude sin(2 pi mode xi)) rescaled to mass m,
///                     u0_x = velocity_amplitude sin(pi xi) (times sin(pi eta) in 2D)
///   uniform           rho0 = m / |Omega|, u0 = 0
///   tabulated         snapshot fields "rho" and optionally "u0", "u1"
struct InitialSpec {
  std::string name = "perturbed_steady";
  double amplitude = 0.05;
  int mode = 1;
  double velocity_amplitude = 0.0;
  std::string path;
};

struct InitialData {
  ScalarField rho;
  VectorField mom;
};

InitialData make_initial(const InitialSpec& spec, const ScalarField& F, double gamma, double m);

}  // namespace barostat
