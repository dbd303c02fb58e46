#include "barostat/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "barostat/parallel.hpp"

namespace barostat {

const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::UniquePositive: return "UniquePositive";
    case Regime::VacuumBoundary: return "VacuumBoundary";
    case Regime::VacuumInterior: return "VacuumInterior";
    case Regime::ContinuumRisk: return "ContinuumRisk";
  }
  return "?";
}

const char* to_string(ThresholdRelation r) noexcept {
  switch (r) {
    case ThresholdRelation::Below: return "Below";
    case ThresholdRelation::Equal: return "Equal";
    case ThresholdRelation::Above: return "Above";
  }
  return "?";
}

namespace {

constexpr double kVacuumFloor = 1e-12;
constexpr double kEqualBand = 1e-9;
constexpr int kMaxIterations = 200;
constexpr int kLevelCount = 64;

// Limited slope of F along one axis: central inside, one-sided at walls.
double slope(const ScalarField& F, int i, int j, int axis) {
  const Grid& g = F.grid;
  const int p = axis == 0 ? i : j;
  const int len = g.n[axis];
  auto at = [&](int q) {
    return axis == 0 ? F.data[g.index(q, j)] : F.data[g.index(i, q)];
  };
  const double h = g.h(axis);
  if (p == 0) return (at(1) - at(0)) / h;
  if (p == len - 1) return (at(len - 1) - at(len - 2)) / h;
  return (at(p + 1) - at(p - 1)) / (2.0 * h);
}

// Mean over s in [0,1] of ((1-s) a + s b)_+^q, exact.
double power_average(double a, double b, double q) {
  const double p = q + 1.0;
  if (a > b) std::swap(a, b);
  if (b <= 0.0) return 0.0;
  if (a <= 0.0) return std::pow(b, p) / (p * (b - a));
  const double r = (b - a) / a;
  if (r == 0.0) return std::pow(a, q);
  return std::pow(a, q) * std::expm1(p * std::log1p(r)) / (p * r);
}

// Extremes of the reconstruction over the corners of every cell.
template <class Pick>
double reconstruction_extreme(const ScalarField& F, Pick pick) {
  const Grid& g = F.grid;
  double best = F.data[0];
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j) {
      const double c = F.data[g.index(i, j)];
      const double dx = 0.5 * g.h(0) * slope(F, i, j, 0);
      const double dy = g.dim == 2 ? 0.5 * g.h(1) * slope(F, i, j, 1) : 0.0;
      for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0}) best = pick(best, c + sx * dx + sy * dy);
    }
  return best;
}

bool level_set_connected(const ScalarField& F, double k) {
  const Grid& g = F.grid;
  std::vector<char> seen(g.cells(), 0);
  int components = 0;
  for (std::size_t start = 0; start < g.cells(); ++start) {
    if (seen[start] || !(F.data[start] > k)) continue;
    if (++components > 1) return false;
    std::queue<std::size_t> todo;
    todo.push(start);
    seen[start] = 1;
    while (!todo.empty()) {
      const std::size_t c = todo.front();
      todo.pop();
      const int i = static_cast<int>(c / g.n[1]);
      const int j = static_cast<int>(c % g.n[1]);
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= g.n[0] || q[1] < 0 || q[1] >= g.n[1]) continue;
        const std::size_t d = g.index(q[0], q[1]);
        if (!seen[d] && F.data[d] > k) {
          seen[d] = 1;
          todo.push(d);
        }
      }
    }
  }
  return true;
}

}  // namespace

double potential_inf(const ScalarField& F) {
  return reconstruction_extreme(F, [](double a, double b) { return std::min(a, b); });
}

double potential_sup(const ScalarField& F) {
  return reconstruction_extreme(F, [](double a, double b) { return std::max(a, b); });
}

ScalarField steady_density(const ScalarField& F, double gamma, double k) {
  require(gamma > 1.0, "steady_density: gamma must exceed 1");
  const Grid& g = F.grid;
  const double c = (gamma - 1.0) / gamma;
  const double q = 1.0 / (gamma - 1.0);
  ScalarField rho(g);
  parallel_for(g.cells(), [&](std::size_t cell) {
    const int i = static_cast<int>(cell / g.n[1]);
    const int j = static_cast<int>(cell % g.n[1]);
    const double center = F.data[cell];
    const double dx = 0.5 * g.h(0) * slope(F, i, j, 0);
    if (g.dim == 1) {
      rho.data[cell] = power_average(c * (center - dx - k), c * (center + dx - k), q);
      return;
    }
    // 2D: 4x4 sub-cell midpoints of the planar reconstruction, each sub-row
    // integrated exactly along x.
    const double dy = 0.5 * g.h(1) * slope(F, i, j, 1);
    double acc = 0.0;
    for (int sy = 0; sy < 4; ++sy) {
      const double oy = dy * ((2.0 * sy + 1.0) / 4.0 - 1.0);
      acc += power_average(c * (center - dx + oy - k), c * (center + dx + oy - k), q);
    }
    rho.data[cell] = acc / 4.0;
  });
  return rho;
}

double mass_at_level(const ScalarField& F, double gamma, double k) {
  return integrate(steady_density(F, gamma, k));
}

double mass_threshold(const ScalarField& F, double gamma) {
  return mass_at_level(F, gamma, potential_inf(F));
}

double disconnection_level(const ScalarField& F, bool* found) {
  std::vector<double> sorted = F.data;
  std::sort(sorted.begin(), sorted.end());
  const double top = sorted.back();
  double below = sorted.front() - 1.0;  // {F > below} is the whole grid
  for (int lvl = 0; lvl < kLevelCount; ++lvl) {
    const double k = sorted[(static_cast<std::size_t>(lvl) * (sorted.size() - 1)) / kLevelCount];
    if (!(k < top)) break;
    if (level_set_connected(F, k)) {
      below = std::max(below, k);
      continue;
    }
    double lo = below, hi = k;
    for (int it = 0; it < 60 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (level_set_connected(F, mid) ? lo : hi) = mid;
    }
    if (found) *found = true;
    return hi;
  }
  if (found) *found = false;
  return potential_sup(F);
}

RegimeReport classify_regime(const ScalarField& F, double gamma, double m) {
  require(gamma > 1.0, "classify_regime: gamma must exceed 1");
  RegimeReport rep;
  rep.m_threshold = mass_threshold(F, gamma);
  if (std::abs(m - rep.m_threshold) <= kEqualBand * rep.m_threshold)
    rep.threshold_relation = ThresholdRelation::Equal;
  else if (m > rep.m_threshold)
    rep.threshold_relation = ThresholdRelation::Above;
  else
    rep.threshold_relation = ThresholdRelation::Below;

  bool found = false;
  rep.k_hat = disconnection_level(F, &found);
  rep.disconnected_level_set = found;
  // With every level set connected, k_hat = sup F and m_hat = S(sup F) = 0.
  rep.m_hat = found ? mass_at_level(F, gamma, rep.k_hat) : 0.0;

  rep.vacuum_present = rep.threshold_relation != ThresholdRelation::Above;
  rep.is_unique = rep.threshold_relation != ThresholdRelation::Below || m >= rep.m_hat;
  return rep;
}

SteadyState solve_steady(const ScalarField& F, double gamma, double m) {
  require(m > 0.0 && std::isfinite(m), "solve_steady: mass must be positive");
  require(gamma > 1.0, "solve_steady: gamma must exceed 1");
  require(F.all_finite(), "solve_steady: potential must be finite");
  const double f_inf = potential_inf(F);
  const double f_sup = potential_sup(F);

  double width = std::max(1.0, f_sup - f_inf);
  double lo = f_inf - width;
  int expansions = 0;
  while (mass_at_level(F, gamma, lo) < m) {
    if (++expansions > kMaxIterations) fail(ErrorKind::Numerical, "solve_steady: cannot bracket mass");
    width *= 2.0;
    lo = f_inf - width;
  }
  double hi = f_sup;
  const double tol = 1e-12 * m;
  double k = 0.5 * (lo + hi);
  double s = mass_at_level(F, gamma, k);
  int it = 0;
  for (; it < kMaxIterations && std::abs(s - m) > tol; ++it) {
    (s > m ? lo : hi) = k;
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    k = mid;
    s = mass_at_level(F, gamma, k);
  }
  if (std::abs(s - m) > 1e-10 * m)
    fail(ErrorKind::Numerical, "solve_steady: bisection did not converge");

  SteadyState out;
  out.rho_s = steady_density(F, gamma, k);
  out.k0 = k;
  out.m = m;
  out.iterations = it;
  const RegimeReport rep = classify_regime(F, gamma, m);
  out.m_threshold = rep.m_threshold;
  out.m_hat = rep.m_hat;
  out.k_hat = rep.k_hat;
  switch (rep.threshold_relation) {
    case ThresholdRelation::Above: out.regime = Regime::UniquePositive; break;
    case ThresholdRelation::Equal: out.regime = Regime::VacuumBoundary; break;
    case ThresholdRelation::Below:
      out.regime = rep.is_unique ? Regime::VacuumInterior : Regime::ContinuumRisk;
      break;
  }
  return out;
}

double steady_residual(const SteadyState& s, const ScalarField& F, double gamma) {
  require(s.rho_s.grid == F.grid, "steady_residual: grid mismatch");
  ScalarField pressure = s.rho_s;
  for (double& x : pressure.data) x = std::pow(x, gamma);
  const VectorField gp = grad(pressure, Boundary::OneSided);
  const VectorField gf = grad(F, Boundary::OneSided);
  double worst = 0.0;
  for (std::size_t k = 0; k < F.size(); ++k) {
    const double r = s.rho_s.data[k];
    if (r < kVacuumFloor) continue;
    double sq = 0.0;
    for (int a = 0; a < F.grid.dim; ++a) {
      const double d = gp.at(a, k) - r * gf.at(a, k);
      sq += d * d;
    }
    worst = std::max(worst, std::sqrt(sq));
  }
  return worst;
}

}  // namespace barostat
