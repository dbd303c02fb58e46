#include "barostat/bogovskii.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "barostat/parallel.hpp"

namespace barostat {

namespace {

constexpr double kMeanTolerance = 1e-12;
constexpr double kSchurTolerance = 1e-12;
constexpr int kSchurMaxIterations = 1000;

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Interior face unknowns of the staggered grid: x-faces i = 1..nx-1, then
// y-faces j = 1..ny-1.
struct Mac {
  int nx, ny;
  double hx, hy;
  int n_u() const { return (nx - 1) * ny; }
  int n_v() const { return nx * (ny - 1); }
  int u_id(int i, int j) const { return (i - 1) * ny + j; }
  int v_id(int i, int j) const { return n_u() + i * (ny - 1) + (j - 1); }
  int cell(int i, int j) const { return i * ny + j; }
};

SpMat vector_laplacian(const Mac& m) {
  std::vector<Eigen::Triplet<double>> t;
  const double ax = 1.0 / (m.hx * m.hx), ay = 1.0 / (m.hy * m.hy);
  // Faces normal to x: Dirichlet faces at i = 0, nx along x, odd ghosts at
  // the y-walls, which sit half a cell away.
  for (int i = 1; i < m.nx; ++i)
    for (int j = 0; j < m.ny; ++j) {
      const int id = m.u_id(i, j);
      double diag = 2.0 * ax;
      if (i > 1) t.emplace_back(id, m.u_id(i - 1, j), -ax);
      if (i < m.nx - 1) t.emplace_back(id, m.u_id(i + 1, j), -ax);
      for (int dj : {-1, 1}) {
        const int q = j + dj;
        if (q < 0 || q >= m.ny) {
          diag += 2.0 * ay;
        } else {
          diag += ay;
          t.emplace_back(id, m.u_id(i, q), -ay);
        }
      }
      t.emplace_back(id, id, diag);
    }
  for (int i = 0; i < m.nx; ++i)
    for (int j = 1; j < m.ny; ++j) {
      const int id = m.v_id(i, j);
      double diag = 2.0 * ay;
      if (j > 1) t.emplace_back(id, m.v_id(i, j - 1), -ay);
      if (j < m.ny - 1) t.emplace_back(id, m.v_id(i, j + 1), -ay);
      for (int di : {-1, 1}) {
        const int q = i + di;
        if (q < 0 || q >= m.nx) {
          diag += 2.0 * ax;
        } else {
          diag += ax;
          t.emplace_back(id, m.v_id(q, j), -ax);
        }
      }
      t.emplace_back(id, id, diag);
    }
  const int n = m.n_u() + m.n_v();
  SpMat a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

Vec apply_dt(const Mac& m, const Vec& q) {
  Vec z(m.n_u() + m.n_v());
  for (int i = 1; i < m.nx; ++i)
    for (int j = 0; j < m.ny; ++j)
      z[m.u_id(i, j)] = (q[m.cell(i - 1, j)] - q[m.cell(i, j)]) / m.hx;
  for (int i = 0; i < m.nx; ++i)
    for (int j = 1; j < m.ny; ++j)
      z[m.v_id(i, j)] = (q[m.cell(i, j - 1)] - q[m.cell(i, j)]) / m.hy;
  return z;
}

Vec apply_d(const Mac& m, const Vec& z) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(m.nx) * m.ny);
  for (int i = 0; i < m.nx; ++i)
    for (int j = 0; j < m.ny; ++j) {
      const double ul = i > 0 ? z[m.u_id(i, j)] : 0.0;
      const double ur = i < m.nx - 1 ? z[m.u_id(i + 1, j)] : 0.0;
      const double vb = j > 0 ? z[m.v_id(i, j)] : 0.0;
      const double vt = j < m.ny - 1 ? z[m.v_id(i, j + 1)] : 0.0;
      out[m.cell(i, j)] = (ur - ul) / m.hx + (vt - vb) / m.hy;
    }
  return out;
}

void remove_mean(Vec& x) { x.array() -= x.mean(); }

struct Factor {
  Grid grid;
  Mac mac{};
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

const Factor& factor_for(const Grid& g) {
  thread_local std::unique_ptr<Factor> cache;
  if (!cache || !(cache->grid == g)) {
    auto f = std::make_unique<Factor>();
    f->grid = g;
    f->mac = Mac{g.n[0], g.n[1], g.h(0), g.h(1)};
    f->ldlt.compute(vector_laplacian(f->mac));
    if (f->ldlt.info() != Eigen::Success)
      fail(ErrorKind::Numerical, "bogovskii: vector Laplacian factorization failed");
    cache = std::move(f);
  }
  return *cache;
}

void check_mean_zero(const ScalarField& f) {
  const double norm = lp_norm(f, 2.0);
  if (std::abs(mean(f)) > kMeanTolerance * norm + 1e-300)
    fail(ErrorKind::InvalidArgument, "bogovskii: input must have zero mean");
}

void fill_cell_average(BogovskiiSolve& s) {
  const Grid& g = s.f.grid;
  const int ny = g.n[1];
  s.v = VectorField(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < ny; ++j) {
      const std::size_t c = g.index(i, j);
      s.v.at(0, c) = 0.5 * (s.face_x[i * ny + j] + s.face_x[(i + 1) * ny + j]);
      if (g.dim == 2) s.v.at(1, c) = 0.5 * (s.face_y[i * (ny + 1) + j] + s.face_y[i * (ny + 1) + j + 1]);
    }
}

void finish(BogovskiiSolve& s) {
  fill_cell_average(s);
  const Grid& g = s.f.grid;
  const double fn = lp_norm(s.f, 2.0);
  ScalarField d = face_divergence(g, s.face_x, s.face_y);
  for (std::size_t k = 0; k < d.size(); ++k) d.data[k] -= s.f.data[k];
  s.div_residual = fn > 0.0 ? lp_norm(d, 2.0) / fn : 0.0;
  double grad_sq = 0.0;
  for (int c = 0; c < g.dim; ++c) {
    ScalarField comp(g, std::vector<double>(s.v.component(c).begin(), s.v.component(c).end()));
    grad_sq += std::pow(lp_norm(grad(comp, Boundary::Odd), 2.0), 2);
  }
  const double h1 = std::sqrt(std::pow(lp_norm(s.v, 2.0), 2) + grad_sq);
  s.h1_ratio = fn > 0.0 ? h1 / fn : 0.0;
}

}  // namespace

ScalarField face_divergence(const Grid& g, const std::vector<double>& face_x,
                            const std::vector<double>& face_y) {
  const int nx = g.n[0], ny = g.n[1];
  require(face_x.size() == static_cast<std::size_t>(nx + 1) * ny, "face_divergence: x-face count");
  if (g.dim == 2)
    require(face_y.size() == static_cast<std::size_t>(nx) * (ny + 1), "face_divergence: y-face count");
  ScalarField out(g);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      double d = (face_x[(i + 1) * ny + j] - face_x[i * ny + j]) / g.h(0);
      if (g.dim == 2) d += (face_y[i * (ny + 1) + j + 1] - face_y[i * (ny + 1) + j]) / g.h(1);
      out.data[g.index(i, j)] = d;
    }
  return out;
}

BogovskiiSolve bogovskii(const ScalarField& f) {
  const Grid& g = f.grid;
  g.validate();
  require(f.all_finite(), "bogovskii: input must be finite");
  check_mean_zero(f);
  BogovskiiSolve s;
  s.f = f;
  const int nx = g.n[0], ny = g.n[1];
  s.face_x.assign(static_cast<std::size_t>(nx + 1) * ny, 0.0);

  if (g.dim == 1) {
    double acc = 0.0;
    for (int i = 0; i < nx - 1; ++i) {
      acc += g.h(0) * f.data[i];
      s.face_x[i + 1] = acc;
    }
    finish(s);
    return s;
  }

  s.face_y.assign(static_cast<std::size_t>(nx) * (ny + 1), 0.0);
  const Factor& fac = factor_for(g);
  const Mac& m = fac.mac;
  Vec rhs = Eigen::Map<const Vec>(f.data.data(), static_cast<Eigen::Index>(f.size()));
  remove_mean(rhs);
  const double rhs_norm = rhs.norm();
  Vec q = Vec::Zero(rhs.size());
  if (rhs_norm > 0.0) {
    auto schur = [&](const Vec& x) { return apply_d(m, fac.ldlt.solve(apply_dt(m, x))); };
    Vec r = rhs;
    Vec p = r;
    double rr = r.squaredNorm();
    int it = 0;
    for (; it < kSchurMaxIterations && std::sqrt(rr) > kSchurTolerance * rhs_norm; ++it) {
      Vec sp = schur(p);
      remove_mean(sp);
      const double alpha = rr / p.dot(sp);
      q += alpha * p;
      r -= alpha * sp;
      const double rr_new = r.squaredNorm();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    s.iterations = it;
    if (std::sqrt(rr) > 1e3 * kSchurTolerance * rhs_norm)
      fail(ErrorKind::Numerical, "bogovskii: Schur complement CG did not converge");
  }
  const Vec z = rhs_norm > 0.0 ? Vec(fac.ldlt.solve(apply_dt(m, q))) : Vec::Zero(m.n_u() + m.n_v());
  for (int i = 1; i < nx; ++i)
    for (int j = 0; j < ny; ++j) s.face_x[i * ny + j] = z[m.u_id(i, j)];
  for (int i = 0; i < nx; ++i)
    for (int j = 1; j < ny; ++j) s.face_y[i * (ny + 1) + j] = z[m.v_id(i, j)];
  finish(s);
  return s;
}

double w1p_norm(const VectorField& v, double p) {
  const Grid& g = v.grid;
  ScalarField gsq(g);
  for (int c = 0; c < g.dim; ++c) {
    ScalarField comp(g, std::vector<double>(v.component(c).begin(), v.component(c).end()));
    const ScalarField m2 = magnitude_squared(grad(comp, Boundary::Odd));
    for (std::size_t k = 0; k < gsq.size(); ++k) gsq.data[k] += m2.data[k];
  }
  for (double& x : gsq.data) x = std::sqrt(x);
  return lp_norm(v, p) + lp_norm(gsq, p);
}

namespace {

struct Modes {
  std::vector<double> a;
  int kmax = 0, lmax = 0;
  double at(int k, int l) const { return a[k * (lmax + 1) + l]; }
};

Modes draw_modes(std::mt19937_64& rng, int kmax, int lmax, bool skip_zero) {
  std::normal_distribution<double> N(0.0, 1.0);
  Modes m;
  m.kmax = kmax;
  m.lmax = lmax;
  for (int k = 0; k <= kmax; ++k)
    for (int l = 0; l <= lmax; ++l) {
      const double z = N(rng);
      m.a.push_back(skip_zero && k == 0 && l == 0 ? 0.0 : z / (1.0 + k * k + l * l));
    }
  return m;
}

double bump(double s) {
  const double b = std::sin(std::numbers::pi * s);
  return b * b;
}

}  // namespace

ScalarField random_smooth_field(const Grid& g, std::mt19937_64& rng, int modes) {
  const Modes m = draw_modes(rng, modes, g.dim == 2 ? modes : 0, true);
  const double pi = std::numbers::pi;
  ScalarField f = ScalarField::sample(g, [&](double x, double y) {
    double s = 0.0;
    for (int k = 0; k <= m.kmax; ++k)
      for (int l = 0; l <= m.lmax; ++l)
        s += m.at(k, l) * std::cos(k * pi * (x - g.origin[0]) / g.extent[0]) *
             std::cos(l * pi * (y - g.origin[1]) / g.extent[1]);
    return s;
  });
  const double mu = mean(f);
  for (double& x : f.data) x -= mu;
  return f;
}

NormScan bogovskii_norm_scan(const Grid& g, double p, int trials, std::uint64_t seed) {
  require(trials >= 10, "bogovskii_norm_scan: need at least 10 trials");
  require(p >= 1.0, "bogovskii_norm_scan: p must be >= 1");
  std::mt19937_64 rng(seed);
  const int nx = g.n[0], ny = g.n[1];
  const double pi = std::numbers::pi;
  NormScan out;
  out.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const ScalarField f = random_smooth_field(g, rng);
    const BogovskiiSolve b = bogovskii(f);
    out.w1p_worst = std::max(out.w1p_worst, w1p_norm(b.v, p) / lp_norm(f, p));

    // g with vanishing normal trace and support shrinking to the interior.
    const Modes mx = draw_modes(rng, 6, g.dim == 2 ? 6 : 0, false);
    const Modes my = draw_modes(rng, 6, g.dim == 2 ? 6 : 0, false);
    auto field = [&](const Modes& m, double x, double y, bool x_normal) {
      double s = 0.0;
      for (int k = 0; k <= m.kmax; ++k)
        for (int l = 0; l <= m.lmax; ++l)
          s += m.at(k, l) * std::cos(k * pi * (x_normal ? x : y)) * std::cos(l * pi * (x_normal ? y : x));
      return s * bump(x) * (g.dim == 2 ? bump(y) : 1.0);
    };
    BogovskiiSolve gf;
    gf.f = ScalarField(g);
    gf.face_x.assign(static_cast<std::size_t>(nx + 1) * ny, 0.0);
    if (g.dim == 2) gf.face_y.assign(static_cast<std::size_t>(nx) * (ny + 1), 0.0);
    for (int i = 1; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        const double x = i * g.h(0) / g.extent[0];
        const double y = g.dim == 2 ? (j + 0.5) * g.h(1) / g.extent[1] : 0.5;
        gf.face_x[i * ny + j] = field(mx, x, y, true);
      }
    if (g.dim == 2)
      for (int i = 0; i < nx; ++i)
        for (int j = 1; j < ny; ++j) {
          const double x = (i + 0.5) * g.h(0) / g.extent[0];
          const double y = j * g.h(1) / g.extent[1];
          gf.face_y[i * (ny + 1) + j] = field(my, x, y, false);
        }
    fill_cell_average(gf);
    ScalarField div_g = face_divergence(g, gf.face_x, gf.face_y);
    const double mu = mean(div_g);
    for (double& x : div_g.data) x -= mu;
    const BogovskiiSolve bg = bogovskii(div_g);
    const double gn = lp_norm(gf.v, p);
    if (gn > 0.0) out.div_form_worst = std::max(out.div_form_worst, lp_norm(bg.v, p) / gn);
  }
  return out;
}

int mollifier_radius(const Grid& g, int axis, double eps) {
  if (axis >= g.dim) return 0;
  const double r = eps / g.h(axis);
  return std::max(0, static_cast<int>(std::ceil(r)) - 1);
}

namespace {

struct Kernel {
  int rx = 0, ry = 0;
  std::vector<double> w;  // (2 rx + 1) x (2 ry + 1), row-major in x
  double at(int a, int b) const { return w[(a + rx) * (2 * ry + 1) + (b + ry)]; }
};

Kernel make_kernel(const Grid& g, double eps) {
  Kernel k;
  k.rx = mollifier_radius(g, 0, eps);
  k.ry = mollifier_radius(g, 1, eps);
  double total = 0.0;
  for (int a = -k.rx; a <= k.rx; ++a)
    for (int b = -k.ry; b <= k.ry; ++b) {
      const double dx = a * g.h(0), dy = g.dim == 2 ? b * g.h(1) : 0.0;
      const double s = std::sqrt(dx * dx + dy * dy) / eps;
      const double v = s < 1.0 ? (1.0 - s * s) * (1.0 - s * s) : 0.0;
      k.w.push_back(v);
      total += v;
    }
  for (double& v : k.w) v /= total;
  return k;
}

}  // namespace

ScalarField mollify_extended(const ScalarField& f, double eps) {
  require(eps > 0.0 && std::isfinite(eps), "mollify: eps must be positive");
  const Grid& g = f.grid;
  const Kernel k = make_kernel(g, eps);
  if (k.rx == 0 && k.ry == 0) {
    warn("mollify: eps below one cell, returning the input unchanged");
    return f;
  }
  Grid e = g;
  e.n = {g.n[0] + 2 * k.rx, g.dim == 2 ? g.n[1] + 2 * k.ry : 1};
  e.extent = {g.extent[0] + 2 * k.rx * g.h(0), g.dim == 2 ? g.extent[1] + 2 * k.ry * g.h(1) : g.extent[1]};
  e.origin = {g.origin[0] - k.rx * g.h(0), g.dim == 2 ? g.origin[1] - k.ry * g.h(1) : g.origin[1]};
  ScalarField out(e);
  parallel_for(e.cells(), [&](std::size_t cell) {
    const int I = static_cast<int>(cell / e.n[1]) - k.rx;
    const int J = static_cast<int>(cell % e.n[1]) - (g.dim == 2 ? k.ry : 0);
    double acc = 0.0;
    for (int a = -k.rx; a <= k.rx; ++a) {
      const int i = I - a;
      if (i < 0 || i >= g.n[0]) continue;
      for (int b = -k.ry; b <= k.ry; ++b) {
        const int j = J - b;
        if (j < 0 || j >= g.n[1]) continue;
        acc += k.at(a, b) * f.data[g.index(i, j)];
      }
    }
    out.data[cell] = acc;
  }, 512);
  return out;
}

ScalarField mollify(const ScalarField& f, double eps) {
  const ScalarField ext = mollify_extended(f, eps);
  if (ext.grid == f.grid) return ext;
  const Grid& g = f.grid;
  const int rx = (ext.grid.n[0] - g.n[0]) / 2;
  const int ry = (ext.grid.n[1] - g.n[1]) / 2;
  ScalarField out(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j) out.data[g.index(i, j)] = ext.data[ext.grid.index(i + rx, j + ry)];
  return out;
}

std::vector<char> interior_mask(const Grid& g, double eps) {
  const int rx = mollifier_radius(g, 0, eps), ry = mollifier_radius(g, 1, eps);
  std::vector<char> mask(g.cells(), 0);
  for (int i = rx + 1; i <= g.n[0] - 2 - rx; ++i) {
    if (g.dim == 1) {
      mask[g.index(i)] = 1;
      continue;
    }
    for (int j = ry + 1; j <= g.n[1] - 2 - ry; ++j) mask[g.index(i, j)] = 1;
  }
  return mask;
}

CommutatorField commutator_residual(const ScalarField& rho, const VectorField& u,
                                    double theta, double eps, double k_eps) {
  const Grid& g = rho.grid;
  require(u.grid == g, "commutator: grid mismatch");
  require(theta > 0.0, "commutator: theta must be positive");
  require(rho.min() >= 0.0, "commutator: density must be nonnegative");
  CommutatorField out;
  out.mask = interior_mask(g, std::max(eps, k_eps));
  out.k_cells = static_cast<std::size_t>(std::count(out.mask.begin(), out.mask.end(), 1));
  if (out.k_cells == 0) fail(ErrorKind::InvalidArgument, "commutator: eps too large, interior set is empty");

  ScalarField pw = rho;
  for (double& x : pw.data) x = std::pow(x, theta);
  const ScalarField smooth = mollify(pw, eps);
  VectorField a(g), b(g);
  for (int c = 0; c < g.dim; ++c)
    for (std::size_t k = 0; k < g.cells(); ++k) {
      a.at(c, k) = smooth.data[k] * u.at(c, k);
      b.at(c, k) = pw.data[k] * u.at(c, k);
    }
  const ScalarField first = div(a, Boundary::Odd);
  const ScalarField second = mollify(div(b, Boundary::Odd), eps);
  out.r = ScalarField(g);
  for (std::size_t k = 0; k < g.cells(); ++k)
    if (out.mask[k]) out.r.data[k] = first.data[k] - second.data[k];
  return out;
}

double commutator_norm(const CommutatorField& c, double q) {
  require(q >= 1.0, "commutator_norm: q must be >= 1");
  std::vector<double> pw;
  pw.reserve(c.k_cells);
  for (std::size_t k = 0; k < c.r.size(); ++k)
    if (c.mask[k]) pw.push_back(std::pow(std::abs(c.r.data[k]), q));
  return std::pow(pairwise_sum(pw) * c.r.grid.cell_volume(), 1.0 / q);
}

CommutatorBound commutator_bound_scan(const Grid& g, double theta, double eps,
                                      double p, double q, int trials, std::uint64_t seed) {
  require(p > 1.0 && q > 1.0 && 1.0 / p + 1.0 / q <= 1.0, "commutator_bound_scan: need 1/p + 1/q <= 1");
  require(trials >= 1, "commutator_bound_scan: need trials >= 1");
  const double r = 1.0 / (1.0 / p + 1.0 / q);
  std::mt19937_64 rng(seed);
  std::vector<double> residual(trials), product(trials);
  for (int t = 0; t < trials; ++t) {
    ScalarField rho = random_smooth_field(g, rng);
    const double scale = std::max(1e-12, std::max(-rho.min(), rho.max()));
    for (double& x : rho.data) x = 1.0 + 0.5 * x / scale;
    VectorField u(g);
    for (int c = 0; c < g.dim; ++c) {
      const ScalarField comp = random_smooth_field(g, rng);
      for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j) {
          const std::size_t k = g.index(i, j);
          double w = bump((g.center(0, i) - g.origin[0]) / g.extent[0]);
          if (g.dim == 2) w *= bump((g.center(1, j) - g.origin[1]) / g.extent[1]);
          u.at(c, k) = w * comp.data[k];
        }
    }
    ScalarField pw = rho;
    for (double& x : pw.data) x = std::pow(x, theta);
    residual[t] = commutator_norm(commutator_residual(rho, u, theta, eps), r);
    product[t] = lp_norm(pw, p) * w1p_norm(u, q);
  }
  CommutatorBound out;
  out.trials = trials;
  for (int t = 0; t < trials; ++t)
    if (product[t] > 0.0) out.c_hat = std::max(out.c_hat, residual[t] / product[t]);
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t)
    out.worst_excess = std::max(out.worst_excess, residual[t] - out.c_hat * product[t]);
  return out;
}

}  // namespace barostat
