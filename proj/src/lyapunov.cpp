#include "barostat/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "barostat/entropy.hpp"

namespace barostat {

double v_from_parts(const SampleParts& p, double kinetic, double delta) {
  return kinetic + p.integral_g - delta * p.cross;
}

double w_from_parts(const SampleParts& p, const GasParams& gp, const LyapunovConfig& lc) {
  return (gp.mu - lc.c_cross * lc.delta) * p.grad_u_sq + (gp.lambda + gp.mu) * p.div_u_sq +
         0.5 * lc.c0 * lc.delta * p.integral_g;
}

namespace {

SampleParts parts_for(const State& s, const SteadyState& ss, const GasParams& gp) {
  if (ss.regime != Regime::UniquePositive)
    fail(ErrorKind::InvalidArgument, "lyapunov: needs a vacuum-free equilibrium (rho_s > 0)");
  return sample_parts(s, ss.rho_s, gp);
}

}  // namespace

double v_delta(const State& s, const SteadyState& ss, const GasParams& gp, const LyapunovConfig& lc) {
  const SampleParts p = parts_for(s, ss, gp);
  return v_from_parts(p, measure(s, ss.rho_s, ss.rho_s, gp).kinetic, lc.delta);
}

double w_delta(const State& s, const SteadyState& ss, const GasParams& gp, const LyapunovConfig& lc) {
  if (!(gp.mu - lc.c_cross * lc.delta > 0.0))
    fail(ErrorKind::InvalidArgument, "w_delta: delta too large, mu - C delta <= 0");
  return w_from_parts(parts_for(s, ss, gp), gp, lc);
}

LyapunovConfig calibrate(const TrajectoryRecord& traj, std::size_t entropy_samples) {
  require(traj.lyapunov_recorded, "calibrate: trajectory has no Lyapunov integrals");
  LyapunovConfig lc;
  lc.theta = traj.theta;
  for (const auto& row : traj.rows)
    if (row.parts.integral_g > 0.0) lc.c_cross = std::max(lc.c_cross, row.parts.young / row.parts.integral_g);
  const auto rho = density_samples(4.0 * traj.reference.max(), entropy_samples);
  const auto levels = density_levels(traj.reference);
  lc.c0 = check_x2(rho, levels, traj.gp.gamma, traj.theta).c0_est;
  return lc;
}

double max_feasible_delta(const TrajectoryRecord& traj, const LyapunovConfig& lc) {
  double d = std::numeric_limits<double>::infinity();
  if (lc.c_cross > 0.0) d = 0.75 * traj.gp.mu / lc.c_cross;
  for (const auto& row : traj.rows) {
    const double e = row.kinetic + row.parts.integral_g;
    const double x = row.parts.cross;
    if (x > 0.0) d = std::min(d, 0.75 * e / x);
    if (x < 0.0) d = std::min(d, e / -x);
  }
  return d;
}

void apply_delta(TrajectoryRecord& traj, const LyapunovConfig& lc) {
  for (auto& row : traj.rows) {
    row.v_delta = v_from_parts(row.parts, row.kinetic, lc.delta);
    row.w_delta = w_from_parts(row.parts, traj.gp, lc);
  }
}

double discrete_poincare_constant(const Grid& g) {
  double lambda = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    const double h = g.h(a);
    const double s = std::sin(std::numbers::pi * h / (2.0 * g.extent[a]));
    lambda += 4.0 * s * s / (h * h);
  }
  return 1.0 / lambda;
}

EquivalenceReport check_equivalence(TrajectoryRecord& traj, LyapunovConfig& lc, double t0, double t1) {
  require(traj.lyapunov_recorded, "check_equivalence: trajectory has no Lyapunov integrals");
  EquivalenceReport rep;
  rep.delta_max = max_feasible_delta(traj, lc);
  if (lc.auto_delta) {
    if (!std::isfinite(rep.delta_max)) rep.delta_max = 1.0;
    lc.delta = 0.5 * rep.delta_max;
  }
  rep.delta = lc.delta;
  rep.c0 = lc.c0;
  rep.c_cross = lc.c_cross;
  apply_delta(traj, lc);

  const GasParams& gp = traj.gp;
  const double tol = 1e-12;
  rep.w_coefficient_positive = gp.mu - lc.c_cross * lc.delta > 0.0;
  rep.w_lower_pass = true;
  rep.poincare_pass = true;
  const double cp = discrete_poincare_constant(traj.reference.grid);
  double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = -min_ratio;
  for (const auto& row : traj.rows) {
    const double e = row.kinetic + row.parts.integral_g;
    const double v = row.v_delta, w = row.w_delta;
    if (e > 0.0) {
      min_ratio = std::min(min_ratio, v / e);
      max_ratio = std::max(max_ratio, v / e);
    }
    if (v < 0.25 * e * (1.0 - tol) || v > 2.0 * e * (1.0 + tol)) ++rep.sandwich_violations;
    const double lower = 0.25 * (gp.mu * row.parts.grad_u_sq + lc.c0 * lc.delta * row.parts.integral_g);
    if (w < lower * (1.0 - tol)) rep.w_lower_pass = false;
    if (w > 0.0) rep.c1_est = std::max(rep.c1_est, v / w);
    if (row.parts.grad_u_sq > 0.0) {
      rep.poincare_measured = std::max(rep.poincare_measured, row.parts.rho_u_sq / row.parts.grad_u_sq);
      if (row.parts.rho_u_sq > row.parts.rho_max * cp * row.parts.grad_u_sq * (1.0 + tol)) rep.poincare_pass = false;
    }
    rep.poincare_bound = std::max(rep.poincare_bound, row.parts.rho_max * cp);
  }
  rep.min_v_over_e = min_ratio;
  rep.max_v_over_e = max_ratio;
  rep.sandwich_pass = rep.sandwich_violations == 0;
  rep.c1_finite = std::isfinite(rep.c1_est);

  std::vector<std::size_t> win;
  for (std::size_t k = 0; k < traj.rows.size(); ++k)
    if (traj.rows[k].t >= t0 && traj.rows[k].t <= t1) win.push_back(k);
  rep.window_t0 = win.empty() ? t0 : traj.rows[win.front()].t;
  rep.window_t1 = win.empty() ? t1 : traj.rows[win.back()].t;
  double c_hat = std::numeric_limits<double>::infinity();
  bool positive = win.size() >= 2;
  for (std::size_t a = 0; a < win.size() && positive; ++a) {
    const auto& ra = traj.rows[win[a]];
    if (!(ra.v_delta > 0.0)) positive = false;
    for (std::size_t b = a + 1; b < win.size() && positive; ++b) {
      const auto& rb = traj.rows[win[b]];
      if (!(rb.v_delta > 0.0)) {
        positive = false;
        break;
      }
      c_hat = std::min(c_hat, -std::log(rb.v_delta / ra.v_delta) / (rb.t - ra.t));
    }
  }
  rep.gronwall_rate = positive ? c_hat : 0.0;
  rep.gronwall_pass = positive && c_hat > 0.0;
  return rep;
}

DecayFit fit_window(std::span<const double> t, std::span<const double> y, std::size_t i0, std::size_t i1) {
  require(t.size() == y.size(), "fit: t and E differ in length");
  require(i0 < i1 && i1 < t.size(), "fit: empty window");
  const std::size_t n = i1 - i0 + 1;
  double mt = 0.0, ml = 0.0;
  for (std::size_t k = i0; k <= i1; ++k) {
    require(y[k] > 0.0, "fit: nonpositive value in window");
    mt += t[k];
    ml += std::log(y[k]);
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t k = i0; k <= i1; ++k) {
    const double dt = t[k] - mt, dl = std::log(y[k]) - ml;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  DecayFit f;
  f.i0 = i0;
  f.i1 = i1;
  f.t0 = t[i0];
  f.t1 = t[i1];
  const double slope = stl / stt;
  f.rate = -slope;
  f.prefactor = std::exp(ml - slope * mt);
  f.r2 = sll > 0.0 ? std::clamp(stl * stl / (stt * sll), 0.0, 1.0) : 1.0;
  f.decades = (std::log(y[i0]) - std::log(y[i1])) / std::numbers::ln10;
  return f;
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> e) {
  require(t.size() == e.size() && t.size() >= 3, "fit_decay: need at least three samples");
  require(e[0] > 0.0, "fit_decay: initial energy must be positive");
  const std::size_t n = t.size();
  const double span = 0.5 * std::numbers::ln10;

  // Window end: first sample at 1e-10 E(0), else the last positive sample.
  std::size_t last = 0;
  for (std::size_t k = 0; k < n && e[k] > 0.0; ++k) {
    last = k;
    if (e[k] <= 1e-10 * e[0]) break;
  }

  // Local slope over the half decade following each sample.
  std::vector<double> slope(last + 1, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> reach(last + 1, 0);
  for (std::size_t i = 0; i <= last; ++i) {
    const double li = std::log(e[i]);
    std::size_t j = i + 1;
    while (j <= last && li - std::log(e[j]) < span) ++j;
    if (j > last) break;
    reach[i] = j;
    slope[i] = -fit_window(t, e, i, j).rate;
  }
  std::size_t start = n;
  for (std::size_t i = 0; i <= last && start == n; ++i) {
    if (!(slope[i] < 0.0)) {
      if (std::isnan(slope[i])) break;
      continue;
    }
    bool stable = true;
    for (std::size_t k = i + 1; k <= reach[i] && stable; ++k)
      stable = !std::isnan(slope[k]) && std::abs(slope[k] - slope[i]) <= 0.1 * std::abs(slope[i]);
    if (stable) start = i;
  }
  if (start == n)
    fail(ErrorKind::FitRefused, "fit_decay: the log-slope never settles within 10% over half a decade");
  DecayFit f = fit_window(t, e, start, last);
  if (f.decades < 2.0)
    fail(ErrorKind::FitRefused, "fit_decay: only " + std::to_string(f.decades) +
                                    " decades of decay after the transient (need 2)");
  f.envelope_pass = true;
  for (std::size_t k = start; k <= last; ++k)
    if (e[k] > 8.0 * e[0] * std::exp(-f.rate * (t[k] - f.t0))) f.envelope_pass = false;
  return f;
}

DecayFit fit_decay(const TrajectoryRecord& traj) {
  std::vector<double> t, e;
  for (const auto& row : traj.rows) {
    t.push_back(row.t);
    e.push_back(row.e_rel);
  }
  return fit_decay(t, e);
}

}  // namespace barostat
