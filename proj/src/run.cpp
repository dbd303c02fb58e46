#include "barostat/run.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "barostat/bogovskii.hpp"
#include "barostat/catalog.hpp"
#include "barostat/entropy.hpp"
#include "barostat/lyapunov.hpp"
#include "barostat/parallel.hpp"
#include "barostat/snapshot.hpp"
#include "json.hpp"

namespace barostat {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Numerical:
      return 3;
    case ErrorKind::FitRefused:
      return 4;
    default:
      return 2;
  }
}

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

const double pi = std::numbers::pi;

// Typed access to one config object; unknown keys are rejected by done().
class Section {
 public:
  Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) bad("", "expected an object");
  }

  bool has(const char* key) const { return j_ && j_->contains(key); }

  double num(const char* key, double def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number()) bad(key, "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) bad(key, "expected a finite number");
    return d;
  }
  double num(const char* key) {
    if (!has(key)) bad(key, "required");
    return num(key, 0.0);
  }
  long long integer(const char* key, long long def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number_integer()) bad(key, "expected an integer");
    return v->get<long long>();
  }
  bool boolean(const char* key, bool def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_boolean()) bad(key, "expected true or false");
    return v->get<bool>();
  }
  std::string str(const char* key, const std::string& def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_string()) bad(key, "expected a string");
    return v->get<std::string>();
  }
  std::string choice(const char* key, const std::string& def, std::initializer_list<const char*> allowed) {
    const std::string s = str(key, def);
    for (const char* a : allowed)
      if (s == a) return s;
    bad(key, "unexpected value '" + s + "'");
  }
  std::vector<double> nums(const char* key, std::vector<double> def) {
    const json* v = get(key);
    if (!v) return def;
    if (v->is_number()) return {num(key, 0.0)};
    if (!v->is_array() || v->empty()) bad(key, "expected a number or a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) bad(key, "expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Section sub(const char* key) {
    const json* v = get(key);
    return Section(v, path_ + "/" + key);
  }
  void done() const {
    if (!j_) return;
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key())) bad(it.key(), "unknown key");
  }
  [[noreturn]] void bad(const std::string& key, const std::string& what) const {
    fail(ErrorKind::Config, "config " + (key.empty() ? path_ : path_ + "/" + key) + ": " + what);
  }

 private:
  const json* get(const char* key) {
    used_.insert(key);
    if (!j_ || !j_->contains(key)) return nullptr;
    return &(*j_)[key];
  }

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

struct Config {
  std::string raw;
  fs::path base;
  std::uint64_t seed = 1;
  GasParams gp{2.0, 0.02, 0.0};
  Grid grid = Grid::line(256);
  PotentialSpec potential;
  double mass = 1.0;
  InitialSpec initial;
  // solver
  double t_end = 20.0, cfl = 0.8, record_dt = 0.05, vacuum_floor = 1e-10, relax_time = 0.0;
  FluxKind flux = FluxKind::Fluctuation;
  TimeScheme scheme = TimeScheme::Euler;
  Reference reference = Reference::Analytic;
  std::size_t max_steps = 0;
  int snapshot_every = 0;
  // lyapunov
  bool lyapunov = true;
  bool auto_delta = true;
  double delta = 0.0;
  std::size_t entropy_samples = 100000;
  // verify
  std::size_t samples = 10000;
  int trials = 20;
  double p = 2.0;
  std::vector<double> eps_cells{8, 4, 2};
  // fit
  std::string trajectory;
  // sweep
  std::vector<double> sweep_gamma, sweep_amplitude, sweep_n;
};

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path q(p);
  return q.is_absolute() ? p : (base / q).string();
}

Grid parse_grid(Section s) {
  const int dim = static_cast<int>(s.integer("dim", 1));
  if (dim != 1 && dim != 2) s.bad("dim", "must be 1 or 2");
  const auto n = s.nums("n", {256});
  const auto ext = s.nums("extent", {1.0});
  s.done();
  for (double x : n)
    if (x != std::floor(x) || x < 4) s.bad("n", "cell counts must be integers >= 4");
  for (double x : ext)
    if (!(x > 0.0)) s.bad("extent", "lengths must be positive");
  auto pick = [](const std::vector<double>& v, std::size_t a) { return a < v.size() ? v[a] : v[0]; };
  Grid g = dim == 1 ? Grid::line(static_cast<int>(n[0]), ext[0])
                    : Grid::rect(static_cast<int>(n[0]), static_cast<int>(pick(n, 1)), ext[0], pick(ext, 1));
  g.validate();
  return g;
}

Config parse_config(const std::string& path) {
  Config c;
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  c.raw = ss.str();
  c.base = fs::path(path).parent_path();

  json j;
  try {
    j = json::parse(c.raw);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < c.raw.size(); ++k) {
      if (c.raw[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigParseError("config " + path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                               ": malformed JSON (" + e.what() + ")",
                           line, col);
  }
  Section root(&j, "");
  root.str("command", "");
  root.str("description", "");
  const long long seed = root.integer("seed", 1);
  if (seed < 0) root.bad("seed", "must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);

  {
    Section g = root.sub("gas");
    c.gp.gamma = g.num("gamma", 2.0);
    c.gp.mu = g.num("mu", 0.02);
    c.gp.lambda = g.num("lambda", 0.0);
    g.done();
    try {
      c.gp.validate();
    } catch (const Error& e) {
      fail(ErrorKind::Config, std::string("config /gas: ") + e.what());
    }
  }
  c.grid = parse_grid(root.sub("grid"));
  {
    Section p = root.sub("potential");
    c.potential.name = p.choice("name", "cosine", {"constant", "linear", "cosine", "doublewell", "tabulated"});
    c.potential.value = p.num("value", 0.0);
    c.potential.offset = p.num("offset", 0.0);
    c.potential.slope = p.num("slope", 1.0);
    c.potential.slope_y = p.num("slope_y", 0.0);
    c.potential.amplitude = p.num("A", 0.5);
    c.potential.k = p.num("k", 1.0);
    c.potential.path = resolve(c.base, p.str("path", ""));
    c.potential.field = p.str("field", "F");
    if (c.potential.name == "tabulated" && c.potential.path.empty()) p.bad("path", "required for tabulated");
    p.done();
  }
  c.mass = root.num("mass", 1.0);
  if (!(c.mass > 0.0)) root.bad("mass", "must be positive");
  {
    Section s = root.sub("initial");
    c.initial.name = s.choice("name", "perturbed_steady", {"perturbed_steady", "uniform", "tabulated"});
    c.initial.amplitude = s.num("amplitude", 0.05);
    c.initial.mode = static_cast<int>(s.integer("mode", 1));
    c.initial.velocity_amplitude = s.num("velocity_amplitude", 0.0);
    c.initial.path = resolve(c.base, s.str("path", ""));
    if (c.initial.name == "tabulated" && c.initial.path.empty()) s.bad("path", "required for tabulated");
    s.done();
  }
  {
    Section s = root.sub("solver");
    c.t_end = s.num("t_end", c.t_end);
    c.cfl = s.num("cfl", c.cfl);
    c.record_dt = s.num("record_dt", c.record_dt);
    c.vacuum_floor = s.num("vacuum_floor", c.vacuum_floor);
    c.flux = s.choice("flux", "fluctuation", {"fluctuation", "rusanov"}) == "rusanov" ? FluxKind::Rusanov
                                                                                     : FluxKind::Fluctuation;
    c.scheme = s.choice("scheme", "euler", {"euler", "heun"}) == "heun" ? TimeScheme::Heun : TimeScheme::Euler;
    c.reference = s.choice("reference", "analytic", {"analytic", "relaxed"}) == "relaxed" ? Reference::Relaxed
                                                                                         : Reference::Analytic;
    c.relax_time = s.num("relax_time", 0.0);
    const long long ms = s.integer("max_steps", 0);
    const long long se = s.integer("snapshot_every", 0);
    if (ms < 0) s.bad("max_steps", "must be nonnegative");
    if (se < 0) s.bad("snapshot_every", "must be nonnegative");
    c.max_steps = static_cast<std::size_t>(ms);
    c.snapshot_every = static_cast<int>(se);
    s.done();
  }
  {
    Section s = root.sub("lyapunov");
    c.lyapunov = s.boolean("enabled", true);
    c.auto_delta = s.boolean("auto_delta", true);
    c.delta = s.num("delta", 0.0);
    const long long n = s.integer("entropy_samples", 100000);
    if (n < 100) s.bad("entropy_samples", "must be at least 100");
    c.entropy_samples = static_cast<std::size_t>(n);
    if (!c.auto_delta && !(c.delta > 0.0)) s.bad("delta", "must be positive when auto_delta is false");
    s.done();
  }
  {
    Section s = root.sub("verify");
    const long long n = s.integer("samples", 10000);
    if (n < 1) s.bad("samples", "must be positive");
    c.samples = static_cast<std::size_t>(n);
    c.trials = static_cast<int>(s.integer("trials", 20));
    if (c.trials < 10) s.bad("trials", "must be at least 10");
    c.p = s.num("p", 2.0);
    if (!(c.p > 1.0)) s.bad("p", "must exceed 1");
    c.eps_cells = s.nums("eps_cells", c.eps_cells);
    for (std::size_t k = 0; k < c.eps_cells.size(); ++k)
      if (!(c.eps_cells[k] >= 1.0) || (k > 0 && c.eps_cells[k] >= c.eps_cells[k - 1]))
        s.bad("eps_cells", "must be decreasing and at least 1");
    s.done();
  }
  {
    Section s = root.sub("fit");
    c.trajectory = resolve(c.base, s.str("trajectory", ""));
    s.done();
  }
  {
    Section s = root.sub("sweep");
    c.sweep_gamma = s.nums("gamma", {c.gp.gamma});
    c.sweep_amplitude = s.nums("amplitude", {c.initial.amplitude});
    c.sweep_n = s.nums("n", {static_cast<double>(c.grid.n[0])});
    for (double n : c.sweep_n)
      if (n != std::floor(n) || n < 4) s.bad("n", "cell counts must be integers >= 4");
    s.done();
  }
  root.done();
  return c;
}

// ---- output helpers ----

class Outputs {
 public:
  explicit Outputs(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) fail(ErrorKind::Io, "cannot create output directory " + dir);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void text(const std::string& name, const std::string& body) {
    std::ofstream out(path(name), std::ios::binary);
    out << body;
    if (!out) fail(ErrorKind::Io, "cannot write " + path(name));
    files_.push_back(path(name));
  }
  void json_file(const std::string& name, const ojson& j) { text(name, j.dump(2) + "\n"); }
  void snapshot(const std::string& name, const Snapshot& s) {
    write_snapshot(path(name), s);
    files_.push_back(path(name));
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  const auto r = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, r.ptr);
  return std::string(16 - s.size(), '0') + s;
}

ojson num_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

// ---- shared pieces ----

struct Problem {
  ScalarField F;
  SteadyState ss;
};

Problem make_problem(const Config& c) {
  Problem p;
  p.F = make_potential(c.potential, c.grid);
  p.ss = solve_steady(p.F, c.gp.gamma, c.mass);
  return p;
}

ojson steady_json(const SteadyState& ss, const ScalarField& F, double gamma) {
  const RegimeReport rr = classify_regime(F, gamma, ss.m);
  std::size_t vac = 0;
  for (double r : ss.rho_s.data) vac += r <= 0.0;
  ojson j;
  j["k0"] = ss.k0;
  j["regime"] = to_string(ss.regime);
  j["m"] = ss.m;
  j["m_threshold"] = ss.m_threshold;
  j["m_hat"] = num_or_null(ss.m_hat);
  j["threshold_relation"] = to_string(rr.threshold_relation);
  j["is_unique"] = rr.is_unique;
  j["vacuum_present"] = rr.vacuum_present;
  j["disconnected_level_set"] = rr.disconnected_level_set;
  j["residual"] = steady_residual(ss, F, gamma);
  j["min_rho_s"] = ss.rho_s.min();
  j["max_rho_s"] = ss.rho_s.max();
  j["vacuum_cells"] = vac;
  j["vacuum_fraction"] = static_cast<double>(vac) / static_cast<double>(ss.rho_s.size());
  j["iterations"] = ss.iterations;
  return j;
}

ojson fit_json(const DecayFit& f) {
  ojson j;
  j["t0"] = f.t0;
  j["t1"] = f.t1;
  j["rate"] = f.rate;
  j["r2"] = f.r2;
  j["prefactor"] = f.prefactor;
  j["decades"] = f.decades;
  j["envelope_pass"] = f.envelope_pass;
  return j;
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (const auto& r : rec.rows) {
    const double vals[] = {r.t, r.mass, r.kinetic, r.potential_gap, r.e_rel, r.e_paper, r.dissipation_cum,
                           r.v_delta, r.w_delta};
    for (std::size_t k = 0; k < std::size(vals); ++k) {
      if (k) out += ',';
      out += format_number(vals[k]);
    }
    out += '\n';
  }
  return out;
}

Snapshot state_snapshot(const State& s) {
  Snapshot snap;
  snap.grid = s.rho.grid;
  snap.names.push_back("rho");
  snap.fields.push_back(s.rho.data);
  const VectorField u = s.velocity();
  for (int c = 0; c < snap.grid.dim; ++c) {
    snap.names.push_back("u" + std::to_string(c));
    const auto comp = u.component(c);
    snap.fields.emplace_back(comp.begin(), comp.end());
  }
  return snap;
}

SimConfig sim_config(const Config& c, const Problem& p) {
  SimConfig s;
  s.gp = c.gp;
  s.grid = p.F.grid;
  s.F = p.F;
  const InitialData ic = make_initial(c.initial, p.F, c.gp.gamma, c.mass);
  s.rho0 = ic.rho;
  s.mom0 = ic.mom;
  s.t_end = c.t_end;
  s.cfl = c.cfl;
  s.record_dt = c.record_dt;
  s.vacuum_floor = c.vacuum_floor;
  s.flux = c.flux;
  s.scheme = c.scheme;
  s.reference = c.reference;
  s.relax_time = c.relax_time;
  s.max_steps = c.max_steps;
  s.record_lyapunov = c.lyapunov;
  try {
    s.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) fail(ErrorKind::Config, std::string("config: ") + e.what());
    throw;
  }
  return s;
}

// ---- commands ----

void cmd_steady(const Config& c, Outputs& out) {
  const Problem p = make_problem(c);
  out.json_file("steady.json", steady_json(p.ss, p.F, c.gp.gamma));
  Snapshot snap;
  snap.grid = p.F.grid;
  snap.names = {"F", "rho_s"};
  snap.fields = {p.F.data, p.ss.rho_s.data};
  out.snapshot("steady.bin", snap);
}

void cmd_simulate(const Config& c, Outputs& out) {
  const Problem p = make_problem(c);
  SimConfig sc = sim_config(c, p);
  sc.diagnostic_path = out.path("diagnostic.bin");
  if (c.snapshot_every > 0) {
    std::error_code ec;
    fs::create_directories(out.path("snapshots"), ec);
    sc.on_sample = [&](const State& s, std::size_t k) {
      if (k % static_cast<std::size_t>(c.snapshot_every) != 0) return;
      std::string idx = std::to_string(k);
      idx = std::string(idx.size() < 6 ? 6 - idx.size() : 0, '0') + idx;
      out.snapshot("snapshots/sample_" + idx + ".bin", state_snapshot(s));
    };
  }
  TrajectoryRecord rec = simulate(sc);

  ojson rep;
  rep["steady"] = steady_json(rec.steady, p.F, c.gp.gamma);
  ojson run;
  run["samples"] = rec.rows.size();
  run["steps"] = rec.steps;
  run["dt_min"] = rec.dt_min;
  run["dt_max"] = rec.dt_max;
  run["t_end"] = c.t_end;
  run["flux"] = to_string(c.flux);
  run["scheme"] = to_string(c.scheme);
  run["reference"] = to_string(c.reference);
  run["floored_mass"] = rec.floored_mass;
  run["weak_solution_range"] = c.gp.weak_solution_range();
  rep["run"] = run;

  const auto& r0 = rec.rows.front();
  double drift = 0.0, excess = -kInf;
  for (const auto& r : rec.rows) {
    drift = std::max(drift, std::abs(r.mass / r0.mass - 1.0));
    if (r0.e_rel > 0.0) excess = std::max(excess, (r.e_rel + r.dissipation_cum) / r0.e_rel - 1.0);
  }
  ojson cons;
  cons["mass_drift"] = drift;
  cons["energy_excess"] = num_or_null(excess);
  cons["energy_inequality_pass"] = !(excess > 1e-3);
  cons["floored_mass_fraction"] = rec.floored_mass / r0.mass;
  rep["conservation"] = cons;

  std::vector<double> t, e;
  for (const auto& r : rec.rows) {
    t.push_back(r.t);
    e.push_back(r.e_rel);
  }
  std::optional<DecayFit> fit;
  rep["fit"] = nullptr;
  rep["fit_error"] = nullptr;
  try {
    fit = fit_decay(t, e);
    rep["fit"] = fit_json(*fit);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::FitRefused && err.kind() != ErrorKind::InvalidArgument) throw;
    rep["fit_error"] = err.what();
  }

  rep["constants"] = nullptr;
  rep["equivalence"] = nullptr;
  rep["fit_v"] = nullptr;
  if (rec.lyapunov_recorded) {
    LyapunovConfig lc = calibrate(rec, c.entropy_samples);
    lc.auto_delta = c.auto_delta;
    if (!c.auto_delta) lc.delta = c.delta;
    const EquivalenceReport eq =
        fit ? check_equivalence(rec, lc, fit->t0, fit->t1) : check_equivalence(rec, lc);
    ojson k;
    k["theta"] = rec.theta;
    k["c0"] = lc.c0;
    k["c_cross"] = lc.c_cross;
    k["poincare"] = discrete_poincare_constant(rec.reference.grid);
    k["delta"] = lc.delta;
    k["delta_max"] = num_or_null(eq.delta_max);
    rep["constants"] = k;
    ojson q;
    q["sandwich_pass"] = eq.sandwich_pass;
    q["sandwich_violations"] = eq.sandwich_violations;
    q["min_v_over_e"] = num_or_null(eq.min_v_over_e);
    q["max_v_over_e"] = num_or_null(eq.max_v_over_e);
    q["w_coefficient_positive"] = eq.w_coefficient_positive;
    q["w_lower_pass"] = eq.w_lower_pass;
    q["c1_est"] = eq.c1_est;
    q["c1_finite"] = eq.c1_finite;
    q["poincare_measured"] = eq.poincare_measured;
    q["poincare_bound"] = eq.poincare_bound;
    q["poincare_pass"] = eq.poincare_pass;
    q["gronwall_rate"] = eq.gronwall_rate;
    q["gronwall_pass"] = eq.gronwall_pass;
    q["window"] = {eq.window_t0, eq.window_t1};
    rep["equivalence"] = q;
    std::vector<double> v;
    bool positive = true;
    for (const auto& r : rec.rows) {
      v.push_back(r.v_delta);
      positive = positive && r.v_delta > 0.0;
    }
    if (positive) {
      try {
        rep["fit_v"] = fit_json(fit_decay(t, v));
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::FitRefused) throw;
      }
    }
  }
  if (!rec.e_rel_analytic.empty()) {
    ojson a = ojson::array();
    for (double x : rec.e_rel_analytic) a.push_back(x);
    rep["e_rel_analytic"] = a;
  }

  out.text("trajectory.csv", trajectory_csv(rec));
  out.json_file("simulate.json", rep);
  out.snapshot("final.bin", state_snapshot(rec.final_state));
}

VectorField smooth_velocity(const Grid& g) {
  VectorField u(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j) {
      const std::size_t k = g.index(i, j);
      const double xi = (g.center(0, i) - g.origin[0]) / g.extent[0];
      if (g.dim == 1) {
        u.at(0, k) = std::sin(pi * xi);
      } else {
        const double eta = (g.center(1, j) - g.origin[1]) / g.extent[1];
        u.at(0, k) = std::sin(pi * xi) * std::sin(pi * eta);
        u.at(1, k) = 0.5 * std::sin(2 * pi * xi) * std::sin(pi * eta);
      }
    }
  return u;
}

void cmd_verify(const Config& c, Outputs& out) {
  const Problem p = make_problem(c);
  const Grid& g = p.F.grid;
  const double gamma = c.gp.gamma, theta = theta_for(gamma);
  std::mt19937_64 rng(c.seed);
  ojson rep;
  rep["seed"] = c.seed;
  rep["steady"] = steady_json(p.ss, p.F, gamma);
  bool all = true;

  ojson ent;
  ent["theta"] = theta;
  {
    const X2Result x2 = check_x2(density_samples(4.0 * std::max(1.0, p.ss.rho_s.max()), c.entropy_samples),
                                 density_levels(p.ss.rho_s), gamma, theta);
    ojson j;
    j["c0_est"] = x2.c0_est;
    j["holds"] = x2.holds;
    j["rhs_nonnegative"] = x2.rhs_nonnegative;
    j["evaluated"] = x2.evaluated;
    j["skipped"] = x2.skipped;
    j["sandwich_violations"] = x2.sandwich_violations;
    j["worst_rho"] = x2.worst_rho;
    j["worst_rho_s"] = x2.worst_rho_s;
    ent["inequality"] = j;
    all = all && x2.holds;
  }
  {
    std::uniform_real_distribution<double> U(0.01, 10.0);
    double worst = 0.0, wr = 0.0, ws = 0.0;
    for (std::size_t k = 0; k < c.samples; ++k) {
      const double r = U(rng), s = U(rng);
      const double res = check_taylor(r, s, theta) / std::max({r, s, 1.0});
      if (res > worst) {
        worst = res;
        wr = r;
        ws = s;
      }
    }
    ojson j;
    j["samples"] = c.samples;
    j["max_scaled_residual"] = worst;
    j["worst_rho"] = wr;
    j["worst_rho_s"] = ws;
    j["pass"] = worst <= 1e-12;
    ent["taylor"] = j;
    all = all && worst <= 1e-12;
  }
  const InitialData ic = make_initial(c.initial, p.F, gamma, c.mass);
  if (p.ss.regime == Regime::UniquePositive && ic.rho.min() > 0.0) {
    const X16Result x16 = check_x16_x17(ic.rho, p.ss, c.gp);
    ojson j;
    j["lhs"] = x16.lhs;
    j["integral_g"] = x16.integral_g;
    j["c16"] = x16.c16;
    j["c17"] = x16.c17;
    j["holds"] = x16.holds;
    ent["mean_value"] = j;
    all = all && x16.holds;
    const X39Result x39 = check_x39(ic.rho, p.ss, c.gp);
    ojson k;
    k["lhs"] = x39.lhs;
    k["norm"] = x39.norm;
    k["c_hat"] = x39.c_hat;
    k["rhs_scaled"] = x39.rhs_scaled;
    k["holds"] = x39.holds;
    ent["pressure_difference"] = k;
    all = all && x39.holds;
  } else {
    ent["mean_value"] = nullptr;
    ent["pressure_difference"] = nullptr;
  }
  rep["entropy"] = ent;

  ojson bog;
  {
    ScalarField f = random_smooth_field(g, rng);
    const BogovskiiSolve b = bogovskii(f);
    ojson j;
    j["div_residual"] = b.div_residual;
    j["h1_ratio"] = b.h1_ratio;
    j["iterations"] = b.iterations;
    j["pass"] = b.div_residual <= 1e-8;
    bog["solve"] = j;
    all = all && b.div_residual <= 1e-8;
    const NormScan ns = bogovskii_norm_scan(g, c.p, c.trials, c.seed);
    ojson k;
    k["p"] = c.p;
    k["trials"] = ns.trials;
    k["w1p_worst"] = ns.w1p_worst;
    k["div_form_worst"] = ns.div_form_worst;
    bog["norm_scan"] = k;
  }
  rep["bogovskii"] = bog;

  ojson com;
  {
    const VectorField u = smooth_velocity(g);
    const double h = g.min_h();
    const double q_end = 2 * gamma / (gamma + 2 * theta);
    const double k_eps = c.eps_cells.front() * h;
    std::string csv = "eps,eps_cells,norm_2,norm_q\n";
    ojson eps = ojson::array(), n2 = ojson::array(), nq = ojson::array();
    double prev = kInf;
    bool decreasing = true;
    double first = 0.0, last = 0.0;
    for (double cells : c.eps_cells) {
      const CommutatorField r = commutator_residual(ic.rho, u, theta, cells * h, k_eps);
      const double a = commutator_norm(r, 2.0), b = commutator_norm(r, q_end);
      csv += format_number(cells * h) + "," + format_number(cells) + "," + format_number(a) + "," +
             format_number(b) + "\n";
      eps.push_back(cells * h);
      n2.push_back(a);
      nq.push_back(b);
      decreasing = decreasing && a < prev;
      if (prev == kInf) first = a;
      prev = last = a;
    }
    out.text("commutator.csv", csv);
    com["theta"] = theta;
    com["q_endpoint"] = q_end;
    com["eps"] = eps;
    com["norm_2"] = n2;
    com["norm_q"] = nq;
    com["decreasing"] = decreasing;
    com["final_over_initial"] = first > 0.0 ? last / first : 0.0;
    // constant density of the same mass
    const ScalarField flat(g, c.mass / g.volume());
    const double flat_norm = commutator_norm(commutator_residual(flat, u, theta, k_eps, k_eps), 2.0);
    com["constant_density_norm_2"] = flat_norm;
    const bool shrinks = decreasing && last <= 0.1 * first;
    com["pass"] = shrinks;
    all = all && shrinks;
  }
  rep["commutator"] = com;
  rep["pass"] = all;
  out.json_file("verify.json", rep);
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;
  const std::vector<double>* col(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return &cols[k];
    return nullptr;
  }
};

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read trajectory " + path);
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Config, "trajectory " + path + " is empty");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) csv.header.push_back(cell);
  csv.cols.resize(csv.header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::size_t k = 0;
    for (std::string cell; std::getline(ls, cell, ','); ++k) {
      if (k >= csv.cols.size()) fail(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": too many columns");
      double v = 0.0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        fail(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      csv.cols[k].push_back(v);
    }
    if (k != csv.cols.size()) fail(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": too few columns");
  }
  return csv;
}

void cmd_fit(const Config& c, const std::string& override_path, Outputs& out) {
  const std::string path = override_path.empty() ? c.trajectory : override_path;
  if (path.empty()) fail(ErrorKind::Config, "fit: no trajectory (fit.trajectory or --trajectory)");
  const Csv csv = read_csv(path);
  const auto* t = csv.col("t");
  const auto* e = csv.col("E_rel");
  if (!t || !e) fail(ErrorKind::Config, "trajectory " + path + " lacks t or E_rel columns");
  const DecayFit f = fit_decay(*t, *e);
  ojson rep = fit_json(f);
  const auto* v = csv.col("V_delta");
  const auto* w = csv.col("W_delta");
  rep["sandwich_pass"] = nullptr;
  rep["c1_est"] = nullptr;
  if (v && w && !v->empty() && std::isfinite(v->front())) {
    bool ok = true;
    double c1 = 0.0;
    for (std::size_t k = 0; k < v->size(); ++k) {
      const double E = (*e)[k], V = (*v)[k], W = (*w)[k];
      if (V < 0.25 * E * (1 - 1e-12) || V > 2 * E * (1 + 1e-12)) ok = false;
      if (W > 0.0) c1 = std::max(c1, V / W);
    }
    rep["sandwich_pass"] = ok;
    rep["c1_est"] = c1;
  }
  rep["source"] = fs::path(path).filename().string();
  out.json_file("fit.json", rep);
}

void cmd_sweep(const Config& c, Outputs& out) {
  std::string csv = "gamma,amplitude,n,rate,r2,t0,t1,decades,envelope_pass,status\n";
  for (double gamma : c.sweep_gamma)
    for (double amp : c.sweep_amplitude)
      for (double n : c.sweep_n) {
        Config cc = c;
        cc.gp.gamma = gamma;
        cc.initial.amplitude = amp;
        cc.grid.n[0] = static_cast<int>(n);
        if (cc.grid.dim == 2) cc.grid.n[1] = static_cast<int>(std::round(n * c.grid.n[1] / c.grid.n[0]));
        cc.lyapunov = false;
        std::string status = "ok";
        DecayFit f;
        f.rate = f.r2 = f.t0 = f.t1 = f.decades = std::numeric_limits<double>::quiet_NaN();
        try {
          cc.gp.validate();
          const Problem p = make_problem(cc);
          const TrajectoryRecord rec = simulate(sim_config(cc, p));
          std::vector<double> t, e;
          for (const auto& r : rec.rows) {
            t.push_back(r.t);
            e.push_back(r.e_rel);
          }
          f = fit_decay(t, e);
        } catch (const Error& err) {
          if (err.kind() == ErrorKind::FitRefused) status = "refused";
          else if (err.kind() == ErrorKind::Numerical) status = "numerical";
          else throw;
        }
        csv += format_number(gamma) + "," + format_number(amp) + "," + format_number(n) + "," +
               format_number(f.rate) + "," + format_number(f.r2) + "," + format_number(f.t0) + "," +
               format_number(f.t1) + "," + format_number(f.decades) + "," + (f.envelope_pass ? "1" : "0") +
               "," + status + "\n";
      }
  out.text("sweep.csv", csv);
}

}  // namespace

TrajectoryRecord simulate_from_config(const std::string& config_path) {
  const Config c = parse_config(config_path);
  return simulate(sim_config(c, make_problem(c)));
}

std::vector<std::string> run_command(const RunRequest& req) {
  static const std::set<std::string> commands{"steady", "simulate", "verify", "fit", "sweep"};
  if (!commands.count(req.command)) fail(ErrorKind::Config, "unknown command '" + req.command + "'");
  if (req.threads > 0) set_thread_count(req.threads);
  Config c;
  if (!req.config_path.empty()) {
    c = parse_config(req.config_path);
  } else if (req.command != "fit") {
    fail(ErrorKind::Config, req.command + ": --config is required");
  }
  if (req.seed) c.seed = *req.seed;

  Outputs out(req.out_dir);
  if (req.command == "steady") cmd_steady(c, out);
  else if (req.command == "simulate") cmd_simulate(c, out);
  else if (req.command == "verify") cmd_verify(c, out);
  else if (req.command == "fit") cmd_fit(c, req.trajectory_path, out);
  else cmd_sweep(c, out);

  ojson man;
  man["command"] = req.command;
  man["config_hash"] = "fnv1a64:" + hex64(fnv1a64(c.raw));
  man["version"] = kVersion;
  man["seed"] = c.seed;
  man["threads"] = thread_count();
  ojson files = ojson::array();
  for (const auto& f : out.files()) files.push_back(fs::relative(f, req.out_dir).generic_string());
  man["outputs"] = files;
  out.json_file("manifest.json", man);
  return out.files();
}

}  // namespace barostat
