#include "barostat/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "barostat/parallel.hpp"

namespace barostat {

double theta_for(double gamma) {
  return std::min({2.0 * gamma / 3.0 - 1.0, 0.5, gamma / 6.0});
}

double pow_diff(double a, double b, double p) {
  if (b == 0.0) return std::pow(a, p);
  if (a == 0.0) return -std::pow(b, p);
  return std::pow(b, p) * std::expm1(p * std::log1p((a - b) / b));
}

namespace {

// ((1+d)^g - 1 - g d) / (g - 1) for d >= -1.
double relative_profile(double d, double gamma) {
  if (std::abs(d) < 0.1) {
    double term = 0.5 * gamma * (gamma - 1.0) * d * d;
    double sum = 0.0;
    for (int k = 2; k < 80 && term != 0.0; ++k) {
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      term *= (gamma - k) / (k + 1.0) * d;
    }
    return sum / (gamma - 1.0);
  }
  return (std::expm1(gamma * std::log1p(d)) - gamma * d) / (gamma - 1.0);
}

}  // namespace

double relative_potential_unchecked(double rho, double rho_s, double gamma) noexcept {
  if (rho_s <= 0.0) return std::pow(rho, gamma) / (gamma - 1.0);
  return std::pow(rho_s, gamma) * relative_profile((rho - rho_s) / rho_s, gamma);
}

double relative_potential(double rho, double rho_s, double gamma) {
  require(rho >= 0.0, "G: density must be nonnegative");
  require(rho_s > 0.0, "G: steady density must be positive");
  require(gamma > 1.0, "G: gamma must exceed 1");
  return relative_potential_unchecked(rho, rho_s, gamma);
}

double relative_energy(const ScalarField& rho, const VectorField& u,
                       const ScalarField& rho_s, const GasParams& gp) {
  require(rho.grid == u.grid && rho.grid == rho_s.grid, "relative_energy: grid mismatch");
  std::size_t negative = 0;
  for (double r : rho.data) negative += r < 0.0;
  if (negative)
    fail(ErrorKind::InvalidArgument,
         "relative_energy: " + std::to_string(negative) + " cells with negative density");
  const ScalarField u2 = magnitude_squared(u);
  std::vector<double> dens(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k)
    dens[k] = 0.5 * rho.data[k] * u2.data[k] +
              relative_potential_unchecked(rho.data[k], rho_s.data[k], gp.gamma);
  return pairwise_sum(dens) * rho.grid.cell_volume();
}

double relative_energy(const ScalarField& rho, const VectorField& u,
                       const SteadyState& s, const GasParams& gp) {
  return relative_energy(rho, u, s.rho_s, gp);
}

std::vector<double> density_samples(double rho_max, std::size_t count) {
  require(rho_max > 0.0 && count >= 4, "density_samples: need rho_max > 0 and count >= 4");
  std::vector<double> out;
  out.reserve(count);
  out.push_back(0.0);
  const std::size_t n_log = (count - 1) / 2;
  const std::size_t n_lin = count - 1 - n_log;
  const double lmin = std::log(1e-8 * rho_max), lmax = std::log(rho_max);
  for (std::size_t i = 0; i < n_log; ++i)
    out.push_back(std::exp(lmin + (lmax - lmin) * i / (n_log - 1)));
  for (std::size_t i = 1; i <= n_lin; ++i)
    out.push_back(rho_max * static_cast<double>(i) / n_lin);
  return out;
}

std::vector<double> density_levels(const ScalarField& rho_s, int count) {
  std::vector<double> pos;
  for (double r : rho_s.data)
    if (r > 0.0) pos.push_back(r);
  require(!pos.empty(), "density_levels: steady density vanishes identically");
  std::sort(pos.begin(), pos.end());
  std::vector<double> out;
  for (int q = 0; q < count; ++q) {
    const double v = pos[(static_cast<std::size_t>(q) * (pos.size() - 1)) / std::max(1, count - 1)];
    if (out.empty() || v != out.back()) out.push_back(v);
  }
  return out;
}

X2Result check_x2(std::span<const double> rho_samples,
                  std::span<const double> rho_s_levels, double gamma, double theta) {
  require(theta > 0.0, "check_x2: theta must be positive (gamma > 3/2)");
  require(!rho_s_levels.empty(), "check_x2: no steady density levels");
  for (double s : rho_s_levels) require(s > 0.0, "check_x2: steady density must be positive");

  struct Row {
    double ratio = std::numeric_limits<double>::infinity();
    double rho = 0.0;
    std::size_t skipped = 0;
    bool rhs_ok = true;
  };
  const std::size_t n_levels = rho_s_levels.size();
  std::vector<Row> rows(rho_samples.size());
  parallel_for(rho_samples.size(), [&](std::size_t i) {
    const double r = rho_samples[i];
    Row& row = rows[i];
    row.rho = r;
    for (std::size_t l = 0; l < n_levels; ++l) {
      const double s = rho_s_levels[l];
      const double d = pow_diff(r, s, theta);
      const double rhs = std::pow(s, -theta) * pow_diff(r, s, gamma) * d;
      if (!(rhs >= 0.0)) row.rhs_ok = false;
      if (r == s || d == 0.0) {
        ++row.skipped;
        continue;
      }
      const double g = relative_potential_unchecked(r, s, gamma);
      row.ratio = std::min({row.ratio, g / (d * d), rhs / g});
    }
  }, 256);

  X2Result res;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    res.skipped += rows[i].skipped;
    res.rhs_nonnegative = res.rhs_nonnegative && rows[i].rhs_ok;
    if (rows[i].ratio < best) {
      best = rows[i].ratio;
      res.worst_rho = rows[i].rho;
    }
  }
  res.evaluated = rho_samples.size() * n_levels - res.skipped;
  require(res.evaluated > 0, "check_x2: degenerate sample set");
  // Shrink by 1e-12 so rounding cannot flip the sandwich at the minimizer.
  res.c0_est = best * (1.0 - 1e-12);

  for (double r : rho_samples) {
    for (double s : rho_s_levels) {
      if (r == s) continue;
      const double d = pow_diff(r, s, theta);
      const double g = relative_potential_unchecked(r, s, gamma);
      const double rhs = std::pow(s, -theta) * pow_diff(r, s, gamma) * d;
      if (res.c0_est * res.c0_est * d * d > res.c0_est * g || res.c0_est * g > rhs)
        ++res.sandwich_violations;
    }
  }
  // Record the level at which the worst sample was attained.
  double worst = std::numeric_limits<double>::infinity();
  for (double s : rho_s_levels) {
    const double r = res.worst_rho;
    if (r == s) continue;
    const double d = pow_diff(r, s, theta);
    if (d == 0.0) continue;
    const double g = relative_potential_unchecked(r, s, gamma);
    const double v = std::min(g / (d * d), std::pow(s, -theta) * pow_diff(r, s, gamma) * d / g);
    if (v < worst) {
      worst = v;
      res.worst_rho_s = s;
    }
  }
  res.holds = res.c0_est > 0.0 && res.rhs_nonnegative && res.sandwich_violations == 0;
  return res;
}

X2Result check_x2(std::span<const double> rho_samples, const SteadyState& s,
                  const GasParams& gp) {
  require(s.regime == Regime::UniquePositive, "check_x2: needs a vacuum-free equilibrium");
  const std::vector<double> levels = density_levels(s.rho_s);
  return check_x2(rho_samples, levels, gp.gamma, theta_for(gp.gamma));
}

EntropyParams entropy_params(const SteadyState& s, const GasParams& gp, std::size_t samples) {
  EntropyParams p;
  p.gamma = gp.gamma;
  p.theta = theta_for(gp.gamma);
  p.rho_s_min = s.rho_s.min();
  p.rho_s_max = s.rho_s.max();
  const auto rho = density_samples(4.0 * p.rho_s_max, samples);
  p.c0_est = check_x2(rho, s, gp).c0_est;
  return p;
}

double taylor_remainder_integral(double rho, double rho_s, double theta) {
  require(theta > 0.0 && theta <= 0.5, "taylor: theta must lie in (0, 1/2]");
  const double base = std::pow(rho_s, theta);
  const double d = pow_diff(rho, rho_s, theta);
  const double expo = 1.0 / theta - 2.0;
  auto f = [&](double tau) {
    const double x = std::max(0.0, base + tau * d);
    return (1.0 - tau) * (expo == 0.0 ? 1.0 : std::pow(x, expo));
  };
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, 0.0, 1.0, 20, 1e-15, &err);
  if (!std::isfinite(val)) fail(ErrorKind::Numerical, "taylor: quadrature failed");
  return val;
}

double check_taylor(double rho, double rho_s, double theta) {
  require(rho > 0.0 && rho_s > 0.0, "taylor: densities must be positive");
  const double inv = 1.0 / theta;
  const double d = pow_diff(rho, rho_s, theta);
  const double first = inv * std::pow(rho_s, 1.0 - theta) * d;
  const double second = inv * (inv - 1.0) * d * d * taylor_remainder_integral(rho, rho_s, theta);
  return std::abs((rho - rho_s) - (first + second));
}

double pointwise_ratio(double rho, double rho_s, double gamma, double theta) {
  const double d = pow_diff(rho, rho_s, theta);
  const double g = relative_potential_unchecked(rho, rho_s, gamma);
  if (g == 0.0) return 0.0;
  return (d * d + std::pow(std::abs(d), 1.0 / theta)) / g;
}

X16Result check_x16_x17(const ScalarField& rho, const SteadyState& s, const GasParams& gp) {
  require(rho.grid == s.rho_s.grid, "check_x16_x17: grid mismatch");
  require(s.regime == Regime::UniquePositive, "check_x16_x17: needs a vacuum-free equilibrium");
  const double m = integrate(s.rho_s);
  if (std::abs(integrate(rho) - m) > 1e-8 * m)
    fail(ErrorKind::InvalidArgument, "check_x16_x17: mass mismatch between rho and rho_s");
  const double gamma = gp.gamma;
  const double theta = theta_for(gamma);
  require(theta > 0.0, "check_x16_x17: needs gamma > 3/2");

  X16Result res;
  std::vector<double> lin(rho.size()), gval(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const double rs = s.rho_s.data[k];
    lin[k] = std::pow(rs, 1.0 - theta) * pow_diff(rho.data[k], rs, theta);
    gval[k] = relative_potential_unchecked(rho.data[k], rs, gamma);
  }
  res.lhs = std::abs(pairwise_sum(lin) * rho.grid.cell_volume());
  res.integral_g = pairwise_sum(gval) * rho.grid.cell_volume();

  // Scan the remainder-to-G ratio over a density grid and the field itself.
  auto remainder_ratio = [&](double r, double rs) {
    const double g = relative_potential_unchecked(r, rs, gamma);
    if (r == rs || g == 0.0) return 0.0;
    const double d = pow_diff(r, rs, theta);
    return d * d * taylor_remainder_integral(r, rs, theta) / g;
  };
  const auto levels = density_levels(s.rho_s);
  const auto samples = density_samples(std::max(4.0 * s.rho_s.max(), rho.max()), 2000);
  double k_rem = 0.0, c17 = 0.0;
  for (double rs : levels)
    for (double r : samples) {
      k_rem = std::max(k_rem, remainder_ratio(r, rs));
      c17 = std::max(c17, pointwise_ratio(r, rs, gamma, theta));
    }
  for (std::size_t k = 0; k < rho.size(); ++k) {
    k_rem = std::max(k_rem, remainder_ratio(rho.data[k], s.rho_s.data[k]));
    c17 = std::max(c17, pointwise_ratio(rho.data[k], s.rho_s.data[k], gamma, theta));
  }
  res.c16 = (1.0 / theta - 1.0) * k_rem;
  res.c17 = c17;
  res.holds = res.lhs <= res.c16 * res.integral_g * (1.0 + 1e-9) + 1e-300;
  return res;
}

X39Result check_x39(const ScalarField& rho, const SteadyState& s, const GasParams& gp) {
  require(rho.grid == s.rho_s.grid, "check_x39: grid mismatch");
  const double gamma = gp.gamma;
  const double vol = rho.grid.cell_volume();
  auto evaluate = [&](double eps, double& lhs, double& norm) {
    std::vector<double> a(rho.size()), b(rho.size());
    for (std::size_t k = 0; k < rho.size(); ++k) {
      const double rs = s.rho_s.data[k];
      const double r = rs + eps * (rho.data[k] - rs);
      a[k] = std::abs(pow_diff(r, rs, gamma));
      b[k] = std::pow(std::abs(r - rs), gamma);
    }
    lhs = pairwise_sum(a) * vol;
    norm = std::pow(pairwise_sum(b) * vol, 1.0 / gamma);
  };

  X39Result res;
  evaluate(1.0, res.lhs, res.norm);
  if (res.norm == 0.0) {
    res.holds = res.lhs == 0.0;
    return res;
  }
  double eps = 1.0;
  for (int k = 0; k <= 10; ++k, eps *= 0.5) {
    double l = 0.0, n = 0.0;
    evaluate(eps, l, n);
    res.ratios.push_back(l / n);
    res.c_hat = std::max(res.c_hat, l / n);
  }
  res.rhs_scaled = res.c_hat * res.norm;
  const double last = res.ratios.back(), prev = res.ratios[res.ratios.size() - 2];
  const bool settled = std::isfinite(last) && std::abs(last - prev) <= 0.1 * prev;
  res.holds = res.lhs <= res.rhs_scaled && settled;
  return res;
}

}  // namespace barostat
