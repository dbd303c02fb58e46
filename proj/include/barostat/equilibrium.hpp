#pragma once

#include "barostat/fields.hpp"

namespace barostat {

enum class Regime {
  UniquePositive,  ///< m above the threshold: strictly positive, unique
  VacuumBoundary,  ///< m at the threshold: k0 = inf F, vacuum where F is minimal
  VacuumInterior,  ///< m below the threshold, still unique (m >= m_hat)
  ContinuumRisk,   ///< m below m_hat: a continuum of equilibria exists
};

enum class ThresholdRelation { Below, Equal, Above };

const char* to_string(Regime r) noexcept;
const char* to_string(ThresholdRelation r) noexcept;

struct SteadyState {
  ScalarField rho_s;
  double k0 = 0.0;
  Regime regime = Regime::UniquePositive;
  double m = 0.0;
  double m_threshold = 0.0;
  double m_hat = 0.0;
  double k_hat = 0.0;
  int iterations = 0;
};

struct RegimeReport {
  bool is_unique = true;
  bool vacuum_present = false;
  ThresholdRelation threshold_relation = ThresholdRelation::Above;
  double m_threshold = 0.0;
  double m_hat = 0.0;
  double k_hat = 0.0;
  /// True when some sampled upper level set {F > k} splits into several
  /// grid-connected pieces.
  bool disconnected_level_set = false;
};

/// Infimum and supremum of the piecewise-linear reconstruction of F used by
/// steady_density; these play the role of inf F and sup F.
double potential_inf(const ScalarField& F);
double potential_sup(const ScalarField& F);

/// Cell averages of ((gamma-1)/gamma (F - k)_+)^(1/(gamma-1)), with F
/// reconstructed linearly inside each cell. Averaging (rather than point
/// sampling) makes integrate(steady_density(F, gamma, k)) == mass_at_level
/// exactly and keeps it accurate across the vacuum interface.
ScalarField steady_density(const ScalarField& F, double gamma, double k);

/// S(k): the mass of the equilibrium profile with shift k. Nonincreasing,
/// continuous, zero at k = potential_sup(F).
double mass_at_level(const ScalarField& F, double gamma, double k);

/// S(inf F): strictly larger masses give a unique, vacuum-free equilibrium.
double mass_threshold(const ScalarField& F, double gamma);

/// Smallest level k at which {F > k} stops being grid-connected, found by a
/// sweep over 64 quantiles of F and refined by bisection. Returns
/// potential_sup(F) when every sampled level set is connected.
double disconnection_level(const ScalarField& F, bool* found = nullptr);

RegimeReport classify_regime(const ScalarField& F, double gamma, double m);

/// Bisection on the monotone S for S(k0) = m, followed by regime
/// classification. Throws for m <= 0 and Numerical on non-convergence.
SteadyState solve_steady(const ScalarField& F, double gamma, double m);

/// max |grad(rho_s^gamma) - rho_s grad F| over non-vacuum cells.
double steady_residual(const SteadyState& s, const ScalarField& F, double gamma);

}  // namespace barostat
