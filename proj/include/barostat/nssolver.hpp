#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "barostat/equilibrium.hpp"
#include "barostat/fields.hpp"

namespace barostat {

/// Numerical dissipation of the Lax-Friedrichs flux on the density.
enum class FluxKind {
  Fluctuation,  ///< -alpha/2 jump of (rho - rho_s): zero at the equilibrium
  Rusanov,      ///< -alpha/2 jump of rho
};

enum class TimeScheme { Euler, Heun };

/// Equilibrium used for E_rel: the analytic profile or the solver's own
/// state after a relaxation pre-run from (rho_s, 0).
enum class Reference { Analytic, Relaxed };

const char* to_string(FluxKind k) noexcept;
const char* to_string(TimeScheme k) noexcept;
const char* to_string(Reference k) noexcept;

struct State {
  double t = 0.0;
  ScalarField rho;
  VectorField mom;

  VectorField velocity() const;
};

/// Extra source terms added to the right-hand side (manufactured solutions).
using Forcing = std::function<void(double t, const Grid& g, ScalarField& s_rho, VectorField& s_mom)>;

struct SimConfig {
  GasParams gp;
  Grid grid;
  ScalarField F;
  double t_end = 1.0;
  double cfl = 0.5;
  double vacuum_floor = 1e-10;
  double record_dt = 0.01;
  ScalarField rho0;
  VectorField mom0;
  FluxKind flux = FluxKind::Fluctuation;
  /// Density the fluctuation flux dissipates against; simulate fills it with
  /// rho_s. Direct callers of step use prepare_balance.
  ScalarField balance;
  TimeScheme scheme = TimeScheme::Euler;
  Reference reference = Reference::Analytic;
  double relax_time = 0.0;
  /// Record the delta-independent integrals behind V_delta and W_delta.
  bool record_lyapunov = true;
  std::size_t max_steps = 0;  ///< 0: unlimited
  Forcing forcing;
  /// Called with every recorded state and its row index.
  std::function<void(const State&, std::size_t)> on_sample;
  /// Written with the last good state when the run aborts on NaN.
  std::string diagnostic_path;

  /// tEnd > 0, cfl in (0, 1), positive finite initial mass, matching grids.
  void validate() const;
};

/// Integrals of one sample that do not depend on delta.
struct SampleParts {
  double grad_u_sq = 0.0;  ///< int |grad u|^2 (face form, equals the viscous pairing)
  double div_u_sq = 0.0;   ///< int (div u)^2
  double rho_u_sq = 0.0;   ///< int rho |u|^2
  double cross = 0.0;      ///< int rho u . rho_s^-1 B(rho_s^(1-t)(rho^t - rho_s^t) - mean)
  double young = 0.0;      ///< 1/2 int rho |rho_s^-1 B(...)|^2
  double integral_g = 0.0; ///< int G(rho, rho_s)
  double rho_max = 0.0;
};

struct TrajectoryRow {
  double t = 0.0;
  double mass = 0.0;
  double kinetic = 0.0;
  double potential_gap = 0.0;
  double e_rel = 0.0;
  double e_paper = 0.0;
  double dissipation_cum = 0.0;
  double v_delta = std::numeric_limits<double>::quiet_NaN();
  double w_delta = std::numeric_limits<double>::quiet_NaN();
  SampleParts parts;
};

struct TrajectoryRecord {
  std::vector<TrajectoryRow> rows;
  GasParams gp;
  SteadyState steady;
  ScalarField reference;           ///< density E_rel is measured against
  std::vector<double> e_rel_analytic;  ///< filled when the reference is relaxed
  State final_state;
  double floored_mass = 0.0;
  std::size_t steps = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  bool lyapunov_recorded = false;
  double theta = 0.0;
};

/// Sets cfg.balance to the equilibrium with the mass of rho0.
void prepare_balance(SimConfig& cfg);

/// Time step limit: cfl / (1 / dt_a + 1 / dt_v) with dt_a = h / max(|u| + c) and
/// dt_v = h^2 rho_min / (2 dim (2 mu + |lambda|)).
double stable_dt(const State& s, const SimConfig& cfg);

/// One explicit step of size dt (no clipping). Mass is conserved to rounding;
/// cells below the vacuum floor are raised and the added mass returned in
/// *floored. Throws Numerical on non-finite values.
State step(const State& s, const SimConfig& cfg, double dt, double* floored = nullptr,
           double* dissipation = nullptr);

/// One step with dt = stable_dt.
State step(const State& s, const SimConfig& cfg);

/// kinetic, potential gap and E_paper of one state against `reference`.
TrajectoryRow measure(const State& s, const ScalarField& reference, const ScalarField& F,
                      const GasParams& gp);

/// delta-independent Lyapunov integrals; requires a vacuum-free reference.
SampleParts sample_parts(const State& s, const ScalarField& rho_s, const GasParams& gp);

/// Integrates to t_end, sampling every record_dt (the last sample is t_end).
TrajectoryRecord simulate(const SimConfig& cfg);

}  // namespace barostat
