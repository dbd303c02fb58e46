#include "barostat/nssolver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "barostat/bogovskii.hpp"
#include "barostat/entropy.hpp"
#include "barostat/parallel.hpp"
#include "barostat/snapshot.hpp"

namespace barostat {

const char* to_string(FluxKind k) noexcept {
  return k == FluxKind::Fluctuation ? "fluctuation" : "rusanov";
}
const char* to_string(TimeScheme k) noexcept { return k == TimeScheme::Euler ? "euler" : "heun"; }
const char* to_string(Reference k) noexcept { return k == Reference::Analytic ? "analytic" : "relaxed"; }

VectorField State::velocity() const {
  VectorField u(rho.grid);
  for (int c = 0; c < rho.grid.dim; ++c)
    for (std::size_t k = 0; k < rho.size(); ++k) u.at(c, k) = mom.at(c, k) / rho.data[k];
  return u;
}

void SimConfig::validate() const {
  gp.validate();
  grid.validate();
  require(t_end > 0.0 && std::isfinite(t_end), "simulate: t_end must be positive");
  require(cfl > 0.0 && cfl < 1.0, "simulate: cfl must lie in (0, 1)");
  require(vacuum_floor > 0.0, "simulate: vacuum_floor must be positive");
  require(record_dt > 0.0, "simulate: record_dt must be positive");
  require(F.grid == grid && rho0.grid == grid && mom0.grid == grid, "simulate: field grids differ from the run grid");
  require(rho0.all_finite() && mom0.all_finite() && F.all_finite(), "simulate: initial data must be finite");
  require(rho0.min() >= 0.0, "simulate: initial density must be nonnegative");
  require(integrate(rho0) > 0.0, "simulate: initial mass must be positive");
  if (reference == Reference::Relaxed) require(relax_time > 0.0, "simulate: relaxed reference needs relax_time > 0");
}

void prepare_balance(SimConfig& cfg) {
  cfg.balance = solve_steady(cfg.F, cfg.gp.gamma, integrate(cfg.rho0)).rho_s;
}

namespace {

double pressure(double rho, double gamma) {
  if (gamma == 2.0) return rho * rho;
  if (gamma == 3.0) return rho * rho * rho;
  return std::pow(rho, gamma);
}

struct Line {
  std::size_t base;
  std::ptrdiff_t stride;
  int len;
};

std::vector<Line> lines_along(const Grid& g, int axis) {
  std::vector<Line> out;
  if (axis == 0) {
    for (int j = 0; j < g.n[1]; ++j) out.push_back({g.index(0, j), static_cast<std::ptrdiff_t>(g.n[1]), g.n[0]});
  } else {
    for (int i = 0; i < g.n[0]; ++i) out.push_back({g.index(i, 0), 1, g.n[1]});
  }
  return out;
}

// Right-hand side evaluation with reusable buffers.
class Stepper {
 public:
  explicit Stepper(const SimConfig& cfg) : cfg_(cfg), g_(cfg.grid), n_(g_.cells()), dim_(g_.dim) {
    if (cfg.flux == FluxKind::Fluctuation)
      require(cfg.balance.grid == g_, "step: fluctuation flux needs cfg.balance (see prepare_balance)");
    grad_f_ = grad(cfg.F, Boundary::Even);
    for (int a = 0; a < dim_; ++a) lines_[a] = lines_along(g_, a);
    u_.resize(n_ * dim_);
    p_.resize(n_);
    c_.resize(n_);
    visc_.resize(n_ * dim_);
    divu_.resize(n_);
    s_rho_ = ScalarField(g_);
    s_mom_ = VectorField(g_);
  }

  // drho, dmom = L(rho, mom); returns the viscous dissipation rate.
  double rhs(const ScalarField& rho, const VectorField& mom, double t, std::vector<double>& drho,
             std::vector<double>& dmom) {
    const double gamma = cfg_.gp.gamma;
    drho.assign(n_, 0.0);
    dmom.assign(n_ * dim_, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      const double r = rho.data[k];
      p_[k] = pressure(r, gamma);
      c_[k] = std::sqrt(gamma * p_[k] / r);
      for (int d = 0; d < dim_; ++d) u_[d * n_ + k] = mom.data[d * n_ + k] / r;
    }
    const bool fluct = cfg_.flux == FluxKind::Fluctuation;
    const double* bal = fluct ? cfg_.balance.data.data() : nullptr;

    for (int a = 0; a < dim_; ++a) {
      const double inv_h = 1.0 / g_.h(a);
      const auto& lines = lines_[a];
      parallel_for(lines.size(), [&](std::size_t li) {
        const Line& L = lines[li];
        double flux[3];
        for (int p = 0; p <= L.len; ++p) {
          // Left and right states; a missing side is the mirror ghost with
          // even density and odd velocity.
          const bool ghost_l = p == 0, ghost_r = p == L.len;
          const std::size_t kl = L.base + static_cast<std::size_t>((ghost_l ? 0 : p - 1) * L.stride);
          const std::size_t kr = L.base + static_cast<std::size_t>((ghost_r ? L.len - 1 : p) * L.stride);
          const double sl = ghost_l ? -1.0 : 1.0, sr = ghost_r ? -1.0 : 1.0;
          const double rl = rho.data[kl], rr = rho.data[kr];
          const double ual = sl * u_[a * n_ + kl], uar = sr * u_[a * n_ + kr];
          const double alpha = std::max(std::abs(ual) + c_[kl], std::abs(uar) + c_[kr]);
          double jump = rr - rl;
          if (fluct) jump -= bal[kr] - bal[kl];
          flux[0] = 0.5 * (rl * ual + rr * uar) - 0.5 * alpha * jump;
          for (int d = 0; d < dim_; ++d) {
            const double ml = sl * mom.data[d * n_ + kl], mr = sr * mom.data[d * n_ + kr];
            double f = 0.5 * (ml * ual + mr * uar) - 0.5 * alpha * (mr - ml);
            if (d == a) f += 0.5 * (p_[kl] + p_[kr]);
            flux[1 + d] = f;
          }
          if (!ghost_l) {
            drho[kl] -= flux[0] * inv_h;
            for (int d = 0; d < dim_; ++d) dmom[d * n_ + kl] -= flux[1 + d] * inv_h;
          }
          if (!ghost_r) {
            drho[kr] += flux[0] * inv_h;
            for (int d = 0; d < dim_; ++d) dmom[d * n_ + kr] += flux[1 + d] * inv_h;
          }
        }
      }, 16);
    }

    for (int d = 0; d < dim_; ++d)
      for (std::size_t k = 0; k < n_; ++k) dmom[d * n_ + k] += rho.data[k] * grad_f_.data[d * n_ + k];

    const double dissipation = viscous();
    for (std::size_t k = 0; k < n_ * dim_; ++k) dmom[k] += visc_[k];

    if (cfg_.forcing) {
      std::fill(s_rho_.data.begin(), s_rho_.data.end(), 0.0);
      std::fill(s_mom_.data.begin(), s_mom_.data.end(), 0.0);
      cfg_.forcing(t, g_, s_rho_, s_mom_);
      for (std::size_t k = 0; k < n_; ++k) drho[k] += s_rho_.data[k];
      for (std::size_t k = 0; k < n_ * dim_; ++k) dmom[k] += s_mom_.data[k];
    }
    return dissipation;
  }

  double max_speed(const ScalarField& rho, const VectorField& mom) const {
    double s = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const double r = rho.data[k];
      double u2 = 0.0;
      for (int d = 0; d < dim_; ++d) u2 += std::pow(mom.data[d * n_ + k] / r, 2);
      s = std::max(s, std::sqrt(u2) + std::sqrt(cfg_.gp.gamma * pressure(r, cfg_.gp.gamma) / r));
    }
    return s;
  }

 private:
  // visc_ = mu lap u + (mu + lambda) grad div u (1D: (2 mu + lambda) u_xx),
  // odd ghosts for u, even ghosts for div u. Returns -<u, visc_>.
  double viscous() {
    const double mu = cfg_.gp.mu, lam = cfg_.gp.lambda;
    std::fill(visc_.begin(), visc_.end(), 0.0);
    const double lap_coef = dim_ == 1 ? 2.0 * mu + lam : mu;
    for (int d = 0; d < dim_; ++d)
      for (int a = 0; a < dim_; ++a) {
        const double ih2 = 1.0 / (g_.h(a) * g_.h(a));
        for (const Line& L : lines_[a])
          for (int p = 0; p < L.len; ++p) {
            const std::size_t k = L.base + static_cast<std::size_t>(p * L.stride);
            const double f = u_[d * n_ + k];
            const double lo = p > 0 ? u_[d * n_ + k - L.stride] : -f;
            const double hi = p < L.len - 1 ? u_[d * n_ + k + L.stride] : -f;
            visc_[d * n_ + k] += lap_coef * (hi - 2.0 * f + lo) * ih2;
          }
      }
    if (dim_ == 2) {
      std::fill(divu_.begin(), divu_.end(), 0.0);
      for (int a = 0; a < 2; ++a) {
        const double i2h = 0.5 / g_.h(a);
        for (const Line& L : lines_[a])
          for (int p = 0; p < L.len; ++p) {
            const std::size_t k = L.base + static_cast<std::size_t>(p * L.stride);
            const double f = u_[a * n_ + k];
            const double lo = p > 0 ? u_[a * n_ + k - L.stride] : -f;
            const double hi = p < L.len - 1 ? u_[a * n_ + k + L.stride] : -f;
            divu_[k] += (hi - lo) * i2h;
          }
      }
      for (int a = 0; a < 2; ++a) {
        const double i2h = 0.5 / g_.h(a);
        for (const Line& L : lines_[a])
          for (int p = 0; p < L.len; ++p) {
            const std::size_t k = L.base + static_cast<std::size_t>(p * L.stride);
            const double f = divu_[k];
            const double lo = p > 0 ? divu_[k - L.stride] : f;
            const double hi = p < L.len - 1 ? divu_[k + L.stride] : f;
            visc_[a * n_ + k] += (mu + lam) * (hi - lo) * i2h;
          }
      }
    }
    std::vector<double>& prod = scratch_;
    prod.resize(n_ * dim_);
    for (std::size_t k = 0; k < n_ * dim_; ++k) prod[k] = -u_[k] * visc_[k];
    return pairwise_sum(prod) * g_.cell_volume();
  }

  const SimConfig& cfg_;
  Grid g_;
  std::size_t n_;
  int dim_;
  VectorField grad_f_;
  std::vector<Line> lines_[2];
  std::vector<double> u_, p_, c_, visc_, divu_, scratch_;
  ScalarField s_rho_;
  VectorField s_mom_;
};

double floor_density(State& s, double floor) {
  double added = 0.0;
  for (double& r : s.rho.data)
    if (r < floor) {
      added += floor - r;
      r = floor;
    }
  return added * s.rho.grid.cell_volume();
}

void check_finite(const State& s) {
  if (!s.rho.all_finite() || !s.mom.all_finite())
    fail(ErrorKind::Numerical, "step: non-finite state at t = " + std::to_string(s.t));
}

class Integrator {
 public:
  explicit Integrator(const SimConfig& cfg) : cfg_(cfg), stepper_(cfg) {}

  double dt_for(const State& s) const {
    const Grid& g = cfg_.grid;
    const double h = g.min_h();
    const double visc = 2.0 * cfg_.gp.mu + std::abs(cfg_.gp.lambda);
    const double dt_cfl = h / stepper_.max_speed(s.rho, s.mom);
    const double dt_visc = h * h * s.rho.min() / (2.0 * g.dim * visc);
    // Harmonic combination: the Rusanov and viscous diffusions add up.
    return cfg_.cfl / (1.0 / dt_cfl + 1.0 / dt_visc);
  }

  // Advances s in place; returns dissipation rate times dt.
  double advance(State& s, double dt, double& floored) {
    const std::size_t n = s.rho.size();
    double diss = stepper_.rhs(s.rho, s.mom, s.t, k1_rho_, k1_mom_) * dt;
    if (cfg_.scheme == TimeScheme::Euler) {
      for (std::size_t k = 0; k < n; ++k) s.rho.data[k] += dt * k1_rho_[k];
      for (std::size_t k = 0; k < s.mom.data.size(); ++k) s.mom.data[k] += dt * k1_mom_[k];
    } else {
      stage_ = s;
      for (std::size_t k = 0; k < n; ++k) stage_.rho.data[k] += dt * k1_rho_[k];
      for (std::size_t k = 0; k < s.mom.data.size(); ++k) stage_.mom.data[k] += dt * k1_mom_[k];
      stage_.t = s.t + dt;
      floored += floor_density(stage_, cfg_.vacuum_floor);
      check_finite(stage_);
      const double d2 = stepper_.rhs(stage_.rho, stage_.mom, stage_.t, k2_rho_, k2_mom_) * dt;
      diss = 0.5 * (diss + d2);
      for (std::size_t k = 0; k < n; ++k)
        s.rho.data[k] = 0.5 * (s.rho.data[k] + stage_.rho.data[k] + dt * k2_rho_[k]);
      for (std::size_t k = 0; k < s.mom.data.size(); ++k)
        s.mom.data[k] = 0.5 * (s.mom.data[k] + stage_.mom.data[k] + dt * k2_mom_[k]);
    }
    s.t += dt;
    floored += floor_density(s, cfg_.vacuum_floor);
    check_finite(s);
    return diss;
  }

 private:
  const SimConfig& cfg_;
  Stepper stepper_;
  std::vector<double> k1_rho_, k1_mom_, k2_rho_, k2_mom_;
  State stage_;
};

}  // namespace

double stable_dt(const State& s, const SimConfig& cfg) {
  SimConfig c = cfg;
  if (c.flux == FluxKind::Fluctuation && !(c.balance.grid == c.grid)) c.flux = FluxKind::Rusanov;
  return Integrator(c).dt_for(s);
}

State step(const State& s, const SimConfig& cfg, double dt, double* floored, double* dissipation) {
  require(dt > 0.0 && std::isfinite(dt), "step: dt must be positive");
  Integrator integ(cfg);
  State out = s;
  double fl = 0.0;
  const double d = integ.advance(out, dt, fl);
  if (floored) *floored = fl;
  if (dissipation) *dissipation = d;
  return out;
}

State step(const State& s, const SimConfig& cfg) { return step(s, cfg, stable_dt(s, cfg)); }

TrajectoryRow measure(const State& s, const ScalarField& reference, const ScalarField& F,
                      const GasParams& gp) {
  const std::size_t n = s.rho.size();
  const int dim = s.rho.grid.dim;
  std::vector<double> kin(n), gap(n), total(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = s.rho.data[k];
    double m2 = 0.0;
    for (int d = 0; d < dim; ++d) m2 += s.mom.at(d, k) * s.mom.at(d, k);
    kin[k] = r > 0.0 ? 0.5 * m2 / r : 0.0;
    gap[k] = relative_potential_unchecked(r, reference.data[k], gp.gamma);
    total[k] = kin[k] + pressure(r, gp.gamma) / (gp.gamma - 1.0) - r * F.data[k];
  }
  const double vol = s.rho.grid.cell_volume();
  TrajectoryRow row;
  row.t = s.t;
  row.mass = integrate(s.rho);
  row.kinetic = pairwise_sum(kin) * vol;
  row.potential_gap = pairwise_sum(gap) * vol;
  row.e_rel = row.kinetic + row.potential_gap;
  row.e_paper = pairwise_sum(total) * vol;
  return row;
}

SampleParts sample_parts(const State& s, const ScalarField& rho_s, const GasParams& gp) {
  require(rho_s.min() > 0.0, "sample_parts: steady density must be positive");
  const double theta = theta_for(gp.gamma);
  require(theta > 0.0, "sample_parts: needs gamma > 3/2");
  const Grid& g = s.rho.grid;
  const std::size_t n = g.cells();
  const double vol = g.cell_volume();
  const VectorField u = s.velocity();
  SampleParts parts;
  parts.grad_u_sq = dirichlet_energy(u);
  parts.div_u_sq = g.dim == 1 ? parts.grad_u_sq : std::pow(lp_norm(div(u, Boundary::Odd), 2.0), 2);

  ScalarField input(g);
  std::vector<double> gval(n), rho_u2(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double rs = rho_s.data[k], r = s.rho.data[k];
    input.data[k] = std::pow(rs, 1.0 - theta) * pow_diff(r, rs, theta);
    gval[k] = relative_potential_unchecked(r, rs, gp.gamma);
    double u2 = 0.0;
    for (int d = 0; d < g.dim; ++d) u2 += u.at(d, k) * u.at(d, k);
    rho_u2[k] = r * u2;
  }
  const double m = mean(input);
  for (double& x : input.data) x -= m;
  const BogovskiiSolve b = bogovskii(input);
  std::vector<double> cross(n), young(n);
  for (std::size_t k = 0; k < n; ++k) {
    double c = 0.0, w2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double w = b.v.at(d, k) / rho_s.data[k];
      c += s.mom.at(d, k) * w;
      w2 += w * w;
    }
    cross[k] = c;
    young[k] = 0.5 * s.rho.data[k] * w2;
  }
  parts.rho_u_sq = pairwise_sum(rho_u2) * vol;
  parts.cross = pairwise_sum(cross) * vol;
  parts.young = pairwise_sum(young) * vol;
  parts.integral_g = pairwise_sum(gval) * vol;
  parts.rho_max = s.rho.max();
  return parts;
}

namespace {

void write_diagnostic(const std::string& path, const State& s) {
  if (path.empty()) return;
  Snapshot snap;
  snap.grid = s.rho.grid;
  snap.names = {"rho"};
  snap.fields = {s.rho.data};
  for (int d = 0; d < snap.grid.dim; ++d) {
    snap.names.push_back(d == 0 ? "mom_x" : "mom_y");
    snap.fields.emplace_back(s.mom.component(d).begin(), s.mom.component(d).end());
  }
  try {
    write_snapshot(path, snap);
  } catch (const Error&) {
    warn("could not write diagnostic snapshot to " + path);
  }
}

// Integrates s to t_stop; calls on_sample at every multiple of record_dt.
template <class OnSample>
void run_until(State& s, const SimConfig& cfg, Integrator& integ, double t_stop, double record_dt,
               TrajectoryRecord& rec, double& dissipation_cum, OnSample&& on_sample) {
  const double t0 = s.t;
  long long next = 1;
  while (s.t < t_stop) {
    const double target = std::min(t_stop, t0 + next * record_dt);
    double dt = integ.dt_for(s);
    if (!(dt > 1e-10 * std::min(record_dt, t_stop)))
      fail(ErrorKind::Numerical, "simulate: time step underflow at t = " + std::to_string(s.t));
    bool hit = false;
    if (s.t + dt >= target * (1.0 - 1e-14)) {
      dt = target - s.t;
      hit = true;
    }
    const State last_good = s;
    try {
      dissipation_cum += integ.advance(s, dt, rec.floored_mass);
    } catch (const Error& e) {
      write_diagnostic(cfg.diagnostic_path, last_good);
      throw;
    }
    if (hit) s.t = target;
    ++rec.steps;
    rec.dt_min = rec.steps == 1 ? dt : std::min(rec.dt_min, dt);
    rec.dt_max = std::max(rec.dt_max, dt);
    if (cfg.max_steps && rec.steps > cfg.max_steps)
      fail(ErrorKind::Numerical, "simulate: step limit exceeded");
    if (hit) {
      on_sample(s);
      ++next;
    }
  }
}

}  // namespace

TrajectoryRecord simulate(const SimConfig& cfg_in) {
  cfg_in.validate();
  SimConfig cfg = cfg_in;
  TrajectoryRecord rec;
  rec.gp = cfg.gp;
  rec.steady = solve_steady(cfg.F, cfg.gp.gamma, integrate(cfg.rho0));
  cfg.balance = rec.steady.rho_s;
  rec.reference = rec.steady.rho_s;
  Integrator integ(cfg);

  if (cfg.reference == Reference::Relaxed) {
    State pre{0.0, rec.steady.rho_s, VectorField(cfg.grid)};
    TrajectoryRecord scratch;
    double cum = 0.0;
    run_until(pre, cfg, integ, cfg.relax_time, cfg.relax_time, scratch, cum, [](const State&) {});
    rec.reference = pre.rho;
  }

  rec.theta = theta_for(cfg.gp.gamma);
  rec.lyapunov_recorded = cfg.record_lyapunov && rec.theta > 0.0 && rec.reference.min() > 0.0 &&
                          rec.steady.regime == Regime::UniquePositive;
  if (cfg.record_lyapunov && !rec.lyapunov_recorded)
    warn("simulate: Lyapunov integrals skipped (needs gamma > 3/2 and a vacuum-free equilibrium)");

  double dissipation_cum = 0.0;
  auto record = [&](const State& s) {
    TrajectoryRow row = measure(s, rec.reference, cfg.F, cfg.gp);
    row.dissipation_cum = dissipation_cum;
    if (rec.lyapunov_recorded) row.parts = sample_parts(s, rec.reference, cfg.gp);
    rec.rows.push_back(row);
    if (cfg.reference == Reference::Relaxed)
      rec.e_rel_analytic.push_back(measure(s, rec.steady.rho_s, cfg.F, cfg.gp).e_rel);
    if (cfg.on_sample) cfg.on_sample(s, rec.rows.size() - 1);
  };

  State s{0.0, cfg.rho0, cfg.mom0};
  record(s);
  run_until(s, cfg, integ, cfg.t_end, cfg.record_dt, rec, dissipation_cum, record);
  rec.final_state = s;
  return rec;
}

}  // namespace barostat
