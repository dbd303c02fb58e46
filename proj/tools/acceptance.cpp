// Acceptance checks: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "barostat/barostat.h"
#include "barostat/bogovskii.hpp"
#include "barostat/entropy.hpp"
#include "barostat/equilibrium.hpp"
#include "barostat/lyapunov.hpp"
#include "barostat/run.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace barostat;
using nlohmann::json;

namespace {

const double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScalarField linear_potential(int n, double shift = 0.0) {
  return ScalarField::sample(Grid::line(n), [&](double x, double) { return x + shift; });
}

struct Ctx {
  fs::path configs;
  fs::path work;

  json load(const std::string& name) const {
    std::ifstream in(configs / name);
    return json::parse(in);
  }
  std::string write(const std::string& name, const json& j) const {
    const fs::path p = work / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }
};

// Standard run and its variants, shared by criteria 6, 9, 10 and 11.
struct StandardRuns {
  TrajectoryRecord base;
  double base_seconds = 0.0;
  std::optional<DecayFit> fit;
  std::string fit_error;
  bool have = false;
};

StandardRuns g_std;

const StandardRuns& standard(const Ctx& ctx) {
  if (!g_std.have) {
    const auto t0 = std::chrono::steady_clock::now();
    g_std.base = simulate_from_config(ctx.write("standard.json", ctx.load("standard_decay.json")));
    g_std.base_seconds = seconds_since(t0);
    try {
      g_std.fit = fit_decay(g_std.base);
    } catch (const Error& e) {
      g_std.fit_error = e.what();
    }
    g_std.have = true;
  }
  return g_std;
}

Outcome c1_steady(const Ctx&) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScalarField F = linear_potential(256);
  const SteadyState s = solve_steady(F, 2.0, 1.0);
  const double res = steady_residual(s, F, 2.0);
  const double sec = seconds_since(t0);
  const bool ok = std::abs(s.k0 + 1.5) <= 1e-10 && res <= 1e-10 && s.regime == Regime::UniquePositive && sec < 1.0;
  return {ok, fmt("k0=%.15g residual=%.2e regime=%s time=%.3fs", s.k0, res, to_string(s.regime), sec)};
}

Outcome c2_vacuum(const Ctx&) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScalarField F = linear_potential(256);
  const SteadyState s = solve_steady(F, 2.0, 0.125);
  const double sec = seconds_since(t0);
  std::size_t zero = 0;
  for (double r : s.rho_s.data) zero += r == 0.0;
  const double frac = static_cast<double>(zero) / s.rho_s.size();
  const bool ok = std::abs(s.k0 - (1 - 1 / std::sqrt(2.0))) <= 1e-8 && s.rho_s.min() == 0.0 && frac > 0.0 &&
                  s.regime != Regime::UniquePositive && s.regime != Regime::ContinuumRisk && sec < 1.0;
  return {ok, fmt("k0=%.12f vacuum_fraction=%.4f regime=%s time=%.3fs", s.k0, frac, to_string(s.regime), sec)};
}

Outcome c3_threshold(const Ctx&) {
  const double a = mass_threshold(linear_potential(256), 2.0);
  double shift = 0.0;
  for (double c : {-3.0, 0.7, 10.0}) shift = std::max(shift, std::abs(mass_threshold(linear_potential(256, c), 2.0) - a));
  const bool ok = std::abs(a - 0.25) <= 1e-10 && shift <= 1e-12;
  return {ok, fmt("threshold=%.15g shift_change=%.2e", a, shift)};
}

Outcome c4_g_oracle(const Ctx&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.01, 10.0);
  double worst = 0.0;
  for (double gamma : {5.0 / 3.0, 2.0, 3.0})
    for (int k = 0; k < 10000; ++k) {
      const double r = U(rng), s = U(rng);
      const double ref = oracle::g_by_quadrature(r, s, gamma);
      worst = std::max(worst, std::abs(relative_potential(r, s, gamma) - ref) / ref);
    }
  const double sec = seconds_since(t0);
  return {worst <= 1e-10 && sec < 10.0, fmt("max_rel_error=%.2e time=%.2fs", worst, sec)};
}

Outcome c5_taylor(const Ctx&) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.01, 10.0);
  double worst = 0.0;
  for (double theta : {1.0 / 9.0, 1.0 / 3.0, 0.5})
    for (int k = 0; k < 10000; ++k) {
      const double r = U(rng), s = U(rng);
      worst = std::max(worst, check_taylor(r, s, theta) / std::max({r, s, 1.0}));
    }
  return {worst <= 1e-12, fmt("max_scaled_residual=%.2e", worst)};
}

Outcome c6_x2(const Ctx& ctx) {
  const SteadyState& ss = standard(ctx).base.steady;
  const double gamma = 2.0;
  const X2Result x = check_x2(density_samples(4.0 * ss.rho_s.max(), 100000), density_levels(ss.rho_s), gamma,
                              theta_for(gamma));
  const bool ok = x.rhs_nonnegative && x.c0_est > 0.0 && x.sandwich_violations == 0 && x.holds;
  return {ok, fmt("evaluated=%zu c0_est=%.4g rhs_nonnegative=%d violations=%zu", x.evaluated, x.c0_est,
                  int(x.rhs_nonnegative), x.sandwich_violations)};
}

double sin_error(int n, bool* walls_zero) {
  const Grid g = Grid::line(n);
  const BogovskiiSolve b = bogovskii(ScalarField::sample(g, [](double x, double) { return std::sin(2 * pi * x); }));
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    err = std::max(err, std::abs(b.v.at(0, i) - (1 - std::cos(2 * pi * g.center(0, i))) / (2 * pi)));
  if (walls_zero) *walls_zero = b.face_x.front() == 0.0 && b.face_x.back() == 0.0;
  return err;
}

Outcome c7_bogovskii(const Ctx&) {
  bool walls = false;
  const double e256 = sin_error(256, &walls), e128 = sin_error(128, nullptr);
  const double ratio = e128 / e256;

  std::mt19937_64 rng(7);
  const Grid g2 = Grid::rect(48, 40, 1.2, 1.0);
  const BogovskiiSolve b2 = bogovskii(random_smooth_field(g2, rng));
  bool walls2 = true;
  for (int j = 0; j < g2.n[1]; ++j)
    walls2 = walls2 && b2.face_x[j] == 0.0 && b2.face_x[static_cast<std::size_t>(g2.n[0]) * g2.n[1] + j] == 0.0;

  const double s64 = bogovskii_norm_scan(Grid::line(64), 2.0, 100, 7).w1p_worst;
  const double s128 = bogovskii_norm_scan(Grid::line(128), 2.0, 100, 7).w1p_worst;
  const double q64 = bogovskii_norm_scan(Grid::rect(64, 64), 2.0, 100, 7).w1p_worst;
  const double q128 = bogovskii_norm_scan(Grid::rect(128, 128), 2.0, 100, 7).w1p_worst;
  const double d1 = std::abs(s128 / s64 - 1), d2 = std::abs(q128 / q64 - 1);

  const bool ok = e256 <= 5e-4 && std::abs(ratio - 4.0) <= 0.4 && walls && walls2 && b2.div_residual <= 1e-8 &&
                  d1 <= 0.1 && d2 <= 0.1;
  return {ok, fmt("err256=%.2e ratio=%.3f walls_zero=%d div_residual_2d=%.1e w1p_change_1d=%.3f "
                  "w1p_change_2d=%.3f",
                  e256, ratio, int(walls && walls2), b2.div_residual, d1, d2)};
}

Outcome c8_commutator(const Ctx&) {
  const Grid g = Grid::rect(128, 128);
  const ScalarField rho =
      ScalarField::sample(g, [](double x, double y) { return 1 + 0.4 * std::cos(2 * pi * x) * std::sin(pi * y); });
  VectorField u(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j) {
      const double x = g.center(0, i), y = g.center(1, j);
      u.at(0, g.index(i, j)) = std::sin(pi * x) * std::sin(2 * pi * y);
      u.at(1, g.index(i, j)) = std::sin(2 * pi * x) * std::sin(pi * y);
    }
  const double h = g.h(0), theta = theta_for(2.0);
  std::vector<double> n;
  for (double e : {8 * h, 4 * h, 2 * h}) n.push_back(commutator_norm(commutator_residual(rho, u, theta, e, 8 * h), 2.0));
  const bool decreasing = n[1] < n[0] && n[2] < n[1];
  const double final_ratio = n[2] / n[0];

  double flat = 0.0;
  for (double e : {8 * h, 4 * h, 2 * h})
    flat = std::max(flat, commutator_norm(commutator_residual(ScalarField(g, 1.0), u, theta, e, 8 * h), 2.0));

  const bool ok = decreasing && final_ratio <= 0.1 && flat == 0.0;
  return {ok, fmt("decrease=%s norms=%.3e,%.3e,%.3e final/initial=%.3f; constant_density=%s norm=%.3e",
                  decreasing && final_ratio <= 0.1 ? "pass" : "fail", n[0], n[1], n[2], final_ratio,
                  flat == 0.0 ? "pass" : "fail", flat)};
}

Outcome c9_conservation(const Ctx& ctx) {
  const StandardRuns& s = standard(ctx);
  const auto& rows = s.base.rows;
  double drift = 0.0, excess = 0.0;
  for (const auto& r : rows) {
    drift = std::max(drift, std::abs(r.mass / rows.front().mass - 1));
    excess = std::max(excess, (r.e_rel + r.dissipation_cum) / rows.front().e_rel - 1);
  }
  const double decades = std::log10(rows.front().e_rel / rows.back().e_rel);
  const bool ok = drift <= 1e-9 && excess <= 1e-3 && decades >= 3.0 && s.base_seconds < 60.0;
  return {ok, fmt("mass_drift=%.2e energy_excess=%.2e e_rel_decades=%.2f steps=%zu time=%.1fs", drift, excess,
                  decades, s.base.steps, s.base_seconds)};
}

std::optional<DecayFit> variant_fit(const Ctx& ctx, const std::string& name, const std::function<void(json&)>& edit,
                                    std::string* err) {
  json c = ctx.load("standard_decay.json");
  c["lyapunov"]["enabled"] = false;
  edit(c);
  try {
    return fit_decay(simulate_from_config(ctx.write(name, c)));
  } catch (const Error& e) {
    *err = e.what();
    return std::nullopt;
  }
}

Outcome c10_decay(const Ctx& ctx) {
  const StandardRuns& s = standard(ctx);
  if (!s.fit) return {false, "fit refused: " + s.fit_error};
  const DecayFit& f = *s.fit;
  std::string err;
  const auto half = variant_fit(ctx, "half.json", [](json& c) { c["initial"]["amplitude"] = 0.025; }, &err);
  const auto coarse = variant_fit(ctx, "coarse.json", [](json& c) { c["grid"]["n"] = json::array({256}); }, &err);
  if (!half || !coarse) return {false, fmt("rate=%.4f r2=%.5f; variant fit refused: %s", f.rate, f.r2, err.c_str())};
  const double dh = std::abs(half->rate / f.rate - 1), dn = std::abs(coarse->rate / f.rate - 1);
  const bool ok = f.r2 >= 0.995 && f.rate > 0.0 && f.envelope_pass && dh < 0.2 && dn < 0.25;
  return {ok, fmt("rate=%.4f r2=%.5f window=[%.2f,%.2f] decades=%.2f envelope=%d half_amplitude_change=%.3f "
                  "n256_change=%.3f",
                  f.rate, f.r2, f.t0, f.t1, f.decades, int(f.envelope_pass), dh, dn)};
}

Outcome c11_lyapunov(const Ctx& ctx) {
  StandardRuns& s = g_std;
  standard(ctx);
  if (!s.base.lyapunov_recorded) return {false, "lyapunov integrals were not recorded"};
  LyapunovConfig lc = calibrate(s.base, 100000);
  const EquivalenceReport eq =
      s.fit ? check_equivalence(s.base, lc, s.fit->t0, s.fit->t1) : check_equivalence(s.base, lc);
  const bool ok = eq.delta > 0.0 && eq.sandwich_pass && eq.c1_finite && eq.gronwall_pass;
  return {ok, fmt("delta0=%.4g V/E=[%.3f,%.3f] violations=%zu c1=%.4g c_hat=%.4g", eq.delta, eq.min_v_over_e,
                  eq.max_v_over_e, eq.sandwich_violations, eq.c1_est, eq.gronwall_rate)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Every file below a and b, compared byte for byte.
bool same_tree(const fs::path& a, const fs::path& b, std::size_t* files) {
  std::vector<fs::path> ra, rb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) ra.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) rb.push_back(fs::relative(e.path(), b));
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  *files = ra.size();
  if (ra != rb || ra.empty()) return false;
  for (const auto& r : ra)
    if (slurp(a / r) != slurp(b / r)) return false;
  return true;
}

Outcome c12_determinism(const Ctx& ctx) {
  json sim = ctx.load("standard_decay.json");
  sim["grid"]["n"] = json::array({128});
  sim["solver"]["t_end"] = 4.0;
  sim["solver"]["snapshot_every"] = 20;
  sim["lyapunov"]["entropy_samples"] = 20000;
  json ver = ctx.load("verify_cosine.json");
  ver["verify"]["trials"] = 10;
  const std::string sim_path = ctx.write("det_simulate.json", sim), ver_path = ctx.write("det_verify.json", ver);

  struct Case {
    const char* command;
    std::string config;
    int threads;
  };
  const Case cases[] = {{"simulate", sim_path, 1}, {"simulate", sim_path, 2}, {"verify", ver_path, 2},
                        {"steady", (ctx.configs / "steady_vacuum.json").string(), 1}};
  std::size_t total = 0;
  int k = 0;
  for (const Case& c : cases) {
    std::string dirs[2];
    for (int rep = 0; rep < 2; ++rep) {
      dirs[rep] = (ctx.work / fmt("det_%d_%d", k, rep)).string();
      fs::remove_all(dirs[rep]);
      if (bs_run(c.command, c.config.c_str(), dirs[rep].c_str(), c.threads, 11, 1, nullptr) != BS_OK)
        return {false, fmt("%s failed: %s", c.command, bs_last_error())};
    }
    std::size_t files = 0;
    if (!same_tree(dirs[0], dirs[1], &files))
      return {false, fmt("%s (threads=%d) outputs differ", c.command, c.threads)};
    total += files;
    ++k;
  }
  return {true, fmt("%d command reruns, %zu files byte-identical", k, total)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"barostat acceptance checks"};
  bool strict = false;
  std::string configs = BAROSTAT_CONFIG_DIR;
  std::string work = (fs::temp_directory_path() / "barostat_acceptance").string();
  std::vector<int> only;
  app.add_flag("--strict", strict, "exit nonzero when any criterion fails");
  app.add_option("--configs", configs, "directory holding the shipped configs")->check(CLI::ExistingDirectory);
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "criteria to run")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(work);
  const Ctx ctx{configs, work};
  using Check = Outcome (*)(const Ctx&);
  const std::pair<const char*, Check> checks[] = {
      {"steady-state exactness", c1_steady},   {"vacuum regime", c2_vacuum},
      {"threshold formula", c3_threshold},     {"relative potential vs quadrature", c4_g_oracle},
      {"second-order expansion", c5_taylor},   {"entropy inequality scan", c6_x2},
      {"Bogovskii operator", c7_bogovskii},    {"commutator", c8_commutator},
      {"conservation and energy", c9_conservation}, {"exponential decay", c10_decay},
      {"Lyapunov sandwich", c11_lyapunov},     {"determinism", c12_determinism},
  };
  int failed = 0;
  for (int i = 0; i < 12; ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), i + 1) == only.end()) continue;
    Outcome o;
    try {
      o = checks[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%2d] %s  %-34s %s\n", i + 1, o.pass ? "PASS" : "FAIL", checks[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return strict && failed ? 1 : 0;
}
