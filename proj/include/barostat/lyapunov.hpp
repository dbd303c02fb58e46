#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "barostat/nssolver.hpp"

namespace barostat {

struct LyapunovConfig {
  double delta = 0.0;
  double theta = 0.0;
  bool auto_delta = true;
  double c_cross = 0.0;  ///< C in (mu - C delta): max over samples of young / int G
  double c0 = 0.0;       ///< C0 of the entropy sandwich
};

/// V_delta = int (rho |u|^2 / 2 + G) - delta * cross.
double v_from_parts(const SampleParts& p, double kinetic, double delta);
/// W_delta = (mu - C delta) int |grad u|^2 + (lambda + mu) int (div u)^2 + (C0 delta / 2) int G.
double w_from_parts(const SampleParts& p, const GasParams& gp, const LyapunovConfig& lc);

/// Both evaluate the integrals for one state; ss must be UniquePositive.
double v_delta(const State& s, const SteadyState& ss, const GasParams& gp, const LyapunovConfig& lc);
/// Throws InvalidArgument when mu - C delta <= 0.
double w_delta(const State& s, const SteadyState& ss, const GasParams& gp, const LyapunovConfig& lc);

/// Measured constants for one trajectory: c_cross from the samples and c0
/// from the entropy scan against the trajectory's reference density.
LyapunovConfig calibrate(const TrajectoryRecord& traj, std::size_t entropy_samples = 100000);

/// Largest delta for which every sample satisfies 1/4 E <= V <= 2 E and
/// mu - C delta >= 3 mu / 4 (which gives W >= 1/4 int (mu |grad u|^2 + C0 delta G)).
double max_feasible_delta(const TrajectoryRecord& traj, const LyapunovConfig& lc);

/// Fills v_delta / w_delta of every row.
void apply_delta(TrajectoryRecord& traj, const LyapunovConfig& lc);

struct EquivalenceReport {
  double delta = 0.0;
  double delta_max = 0.0;
  double c0 = 0.0;
  double c_cross = 0.0;
  bool sandwich_pass = false;
  std::size_t sandwich_violations = 0;
  double min_v_over_e = std::numeric_limits<double>::quiet_NaN();
  double max_v_over_e = std::numeric_limits<double>::quiet_NaN();
  bool w_lower_pass = false;
  bool w_coefficient_positive = false;
  double c1_est = 0.0;  ///< max V / W over samples with W > 0
  bool c1_finite = false;
  double poincare_measured = 0.0;  ///< max int rho |u|^2 / int |grad u|^2
  double poincare_bound = 0.0;     ///< max rho times the discrete Dirichlet constant
  bool poincare_pass = false;
  double gronwall_rate = 0.0;      ///< min over window pairs of -log(V_t / V_s) / (t - s)
  bool gronwall_pass = false;
  double window_t0 = 0.0;
  double window_t1 = 0.0;
};

/// Chooses delta (auto_delta: half the feasible maximum), fills the V/W
/// columns and checks the sandwich, the W lower bound, V <= C1 W, the
/// Poincare chain and the Gronwall envelope on [t0, t1] (defaults: the
/// whole trajectory).
EquivalenceReport check_equivalence(TrajectoryRecord& traj, LyapunovConfig& lc,
                                    double t0 = 0.0,
                                    double t1 = std::numeric_limits<double>::infinity());

/// 1 / (smallest eigenvalue of the odd-ghost Laplacian) on the grid.
double discrete_poincare_constant(const Grid& g);

struct DecayFit {
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  double rate = 0.0;
  double r2 = 0.0;
  double prefactor = 0.0;  ///< exp(intercept) of log E = log A - rate t
  double decades = 0.0;    ///< log10 E(t0) / E(t1)
  bool envelope_pass = false;  ///< E <= 8 E(0) exp(-rate (t - t0)) on the window
};

/// Transient detector and log-linear fit. Throws FitRefused when the window
/// holds less than two decades of decay.
DecayFit fit_decay(std::span<const double> t, std::span<const double> e);
DecayFit fit_decay(const TrajectoryRecord& traj);

/// Least-squares fit of log y on a fixed index window [i0, i1].
DecayFit fit_window(std::span<const double> t, std::span<const double> y, std::size_t i0,
                    std::size_t i1);

}  // namespace barostat
