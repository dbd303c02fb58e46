#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "barostat/equilibrium.hpp"
#include "barostat/fields.hpp"

namespace barostat {

/// min{(2/3) gamma - 1, 1/2, gamma / 6}; positive only for gamma > 3/2.
double theta_for(double gamma);

/// a^p - b^p without cancellation when a is close to b (a, b >= 0).
double pow_diff(double a, double b, double p);

/// Relative potential G(rho, rho_s) = rho * int_{rho_s}^{rho} (h^g - rho_s^g) / h^2 dh,
/// evaluated in closed form
///   rho^g / (g-1) + rho_s^g - g/(g-1) rho rho_s^(g-1)
/// with a binomial series near rho = rho_s. Throws for rho < 0 or rho_s <= 0.
double relative_potential(double rho, double rho_s, double gamma);

/// Same value without argument checks; rho_s = 0 yields the vacuum limit
/// rho^g / (g-1).
double relative_potential_unchecked(double rho, double rho_s, double gamma) noexcept;

/// int (rho |u|^2 / 2 + G(rho, rho_s)) dx. Negative density cells throw.
double relative_energy(const ScalarField& rho, const VectorField& u,
                       const ScalarField& rho_s, const GasParams& gp);
double relative_energy(const ScalarField& rho, const VectorField& u,
                       const SteadyState& s, const GasParams& gp);

struct EntropyParams {
  double gamma = 0.0;
  double theta = 0.0;
  double c0_est = 0.0;
  double rho_s_min = 0.0;
  double rho_s_max = 0.0;
};

/// Log/linear mixed grid on [0, rho_max]: half the points geometric from
/// 1e-8 rho_max, half uniform, plus 0.
std::vector<double> density_samples(double rho_max, std::size_t count);

/// Up to `count` quantile levels of the strictly positive values of rho_s.
std::vector<double> density_levels(const ScalarField& rho_s, int count = 16);

struct X2Result {
  double c0_est = 0.0;
  bool holds = false;
  bool rhs_nonnegative = true;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t sandwich_violations = 0;
  double worst_rho = 0.0;
  double worst_rho_s = 0.0;
};

/// Scans C0^2 (r^t - s^t)^2 <= C0 G(r, s) <= s^-t (r^g - s^g)(r^t - s^t) over
/// every (sample, level) pair and returns the largest admissible C0.
/// Pairs with r == s are skipped.
X2Result check_x2(std::span<const double> rho_samples,
                  std::span<const double> rho_s_levels, double gamma, double theta);
X2Result check_x2(std::span<const double> rho_samples, const SteadyState& s,
                  const GasParams& gp);

/// Entropy exponent and scanned C0 for one equilibrium (UniquePositive only).
EntropyParams entropy_params(const SteadyState& s, const GasParams& gp,
                             std::size_t samples = 100000);

/// int_0^1 (1 - tau) (rho_s^t + tau (rho^t - rho_s^t))^(1/t - 2) dtau by
/// adaptive Gauss-Kronrod.
double taylor_remainder_integral(double rho, double rho_s, double theta);

/// |(rho - rho_s) - expansion| for the exact second-order expansion of rho
/// in powers of rho^theta - rho_s^theta about rho_s.
double check_taylor(double rho, double rho_s, double theta);

struct X16Result {
  double lhs = 0.0;        ///< |int rho_s^(1-t) (rho^t - rho_s^t)|
  double integral_g = 0.0; ///< int G(rho, rho_s)
  double c16 = 0.0;        ///< scanned constant for the integrated bound
  double c17 = 0.0;        ///< scanned constant for the pointwise bound
  bool holds = false;
};

/// Requires int rho == int rho_s within 1e-8 m.
X16Result check_x16_x17(const ScalarField& rho, const SteadyState& s,
                        const GasParams& gp);

/// (d^2 + |d|^(1/t)) / G with d = rho^t - rho_s^t.
double pointwise_ratio(double rho, double rho_s, double gamma, double theta);

struct X39Result {
  double lhs = 0.0;         ///< int |rho^g - rho_s^g|
  double norm = 0.0;        ///< ||rho - rho_s||_{L^g}
  double c_hat = 0.0;
  double rhs_scaled = 0.0;  ///< c_hat * norm
  bool holds = false;
  std::vector<double> ratios;  ///< along rho_s + 2^-k (rho - rho_s), k = 0..10
};

X39Result check_x39(const ScalarField& rho, const SteadyState& s, const GasParams& gp);

}  // namespace barostat
