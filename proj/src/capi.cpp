#include "barostat/barostat.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "barostat/entropy.hpp"
#include "barostat/equilibrium.hpp"
#include "barostat/lyapunov.hpp"
#include "barostat/parallel.hpp"
#include "barostat/run.hpp"
#include "json.hpp"

struct bs_field {
  barostat::ScalarField f;
};
struct bs_steady {
  barostat::SteadyState s;
  barostat::ScalarField F;
  double gamma;
};
struct bs_trajectory {
  barostat::TrajectoryRecord rec;
};

namespace {

using barostat::ErrorKind;

thread_local std::string g_error;
thread_local std::string g_error_json;

bs_status status_of(ErrorKind k) { return static_cast<bs_status>(static_cast<int>(k)); }

void set_error(bs_status s, const std::string& msg, const nlohmann::ordered_json* location = nullptr) {
  g_error = msg;
  nlohmann::ordered_json j;
  j["status"] = bs_status_name(s);
  j["exit_code"] = bs_exit_code(s);
  j["message"] = msg;
  if (location) j["location"] = *location;
  g_error_json = j.dump();
}

template <class Fn>
bs_status guarded(Fn&& fn) {
  g_error.clear();
  g_error_json.clear();
  try {
    fn();
    return BS_OK;
  } catch (const barostat::ConfigParseError& e) {
    nlohmann::ordered_json loc;
    loc["line"] = e.line();
    loc["column"] = e.column();
    set_error(BS_CONFIG, e.what(), &loc);
    return BS_CONFIG;
  } catch (const barostat::Error& e) {
    set_error(status_of(e.kind()), e.what());
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    set_error(BS_INTERNAL, "out of memory");
    return BS_INTERNAL;
  } catch (const std::exception& e) {
    set_error(BS_INTERNAL, e.what());
    return BS_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) barostat::fail(ErrorKind::InvalidArgument, std::string(what) + " is NULL");
}

void fill_fit(const barostat::DecayFit& f, bs_fit* out) {
  out->t0 = f.t0;
  out->t1 = f.t1;
  out->rate = f.rate;
  out->r2 = f.r2;
  out->prefactor = f.prefactor;
  out->decades = f.decades;
  out->envelope_pass = f.envelope_pass ? 1 : 0;
}

template <class MakeGrid>
bs_status make_field(MakeGrid&& make_grid, const double* values, bs_field** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    const barostat::Grid g = make_grid();
    g.validate();
    auto* h = new bs_field{barostat::ScalarField(g)};
    if (values) std::memcpy(h->f.data.data(), values, sizeof(double) * h->f.size());
    if (!h->f.all_finite()) {
      delete h;
      barostat::fail(ErrorKind::InvalidArgument, "field values must be finite");
    }
    *out = h;
  });
}

}  // namespace

extern "C" {

const char* bs_version(void) { return barostat::kVersion; }
const char* bs_last_error(void) { return g_error.c_str(); }
const char* bs_last_error_json(void) { return g_error_json.c_str(); }

const char* bs_status_name(bs_status s) {
  switch (s) {
    case BS_OK:
      return "ok";
    case BS_INVALID_ARGUMENT:
      return "invalid_argument";
    case BS_CONFIG:
      return "config";
    case BS_NUMERICAL:
      return "numerical";
    case BS_FIT_REFUSED:
      return "fit_refused";
    case BS_IO:
      return "io";
    default:
      return "internal";
  }
}

int bs_exit_code(bs_status s) {
  if (s == BS_OK) return 0;
  if (s == BS_INTERNAL || s < BS_OK || s > BS_INTERNAL) return 1;
  return barostat::exit_code_for(static_cast<ErrorKind>(s));
}

bs_status bs_set_threads(int n) {
  return guarded([&] {
    barostat::require(n >= 1, "thread count must be at least 1");
    barostat::set_thread_count(n);
  });
}

int bs_threads(void) { return barostat::thread_count(); }

bs_status bs_field_create_1d(int n, double length, const double* values, bs_field** out) {
  return make_field([&] { return barostat::Grid::line(n, length); }, values, out);
}

bs_status bs_field_create_2d(int nx, int ny, double lx, double ly, const double* values, bs_field** out) {
  return make_field([&] { return barostat::Grid::rect(nx, ny, lx, ly); }, values, out);
}

void bs_field_free(bs_field* f) { delete f; }

size_t bs_field_size(const bs_field* f) { return f ? f->f.size() : 0; }

bs_status bs_field_values(const bs_field* f, double* out, size_t capacity) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    barostat::require(capacity >= f->f.size(), "output buffer too small");
    std::memcpy(out, f->f.data.data(), sizeof(double) * f->f.size());
  });
}

bs_status bs_field_integrate(const bs_field* f, double* out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    *out = barostat::integrate(f->f);
  });
}

bs_status bs_mass_threshold(const bs_field* F, double gamma, double* out) {
  return guarded([&] {
    need(F, "F");
    need(out, "out");
    barostat::require(gamma > 1.0, "gamma must exceed 1");
    *out = barostat::mass_threshold(F->f, gamma);
  });
}

bs_status bs_steady_solve(const bs_field* F, double gamma, double m, bs_steady** out) {
  return guarded([&] {
    need(F, "F");
    need(out, "out");
    *out = nullptr;
    *out = new bs_steady{barostat::solve_steady(F->f, gamma, m), F->f, gamma};
  });
}

void bs_steady_free(bs_steady* s) { delete s; }

bs_status bs_steady_get_info(const bs_steady* s, bs_steady_info* out) {
  return guarded([&] {
    need(s, "steady");
    need(out, "out");
    out->k0 = s->s.k0;
    out->m = s->s.m;
    out->m_threshold = s->s.m_threshold;
    out->residual = barostat::steady_residual(s->s, s->F, s->gamma);
    out->min_rho_s = s->s.rho_s.min();
    out->regime = static_cast<bs_regime>(static_cast<int>(s->s.regime));
  });
}

bs_status bs_steady_density(const bs_steady* s, bs_field** out) {
  return guarded([&] {
    need(s, "steady");
    need(out, "out");
    *out = new bs_field{s->s.rho_s};
  });
}

bs_status bs_relative_potential(double rho, double rho_s, double gamma, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = barostat::relative_potential(rho, rho_s, gamma);
  });
}

bs_status bs_theta(double gamma, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = barostat::theta_for(gamma);
  });
}

bs_status bs_simulate(const char* config_path, bs_trajectory** out) {
  return guarded([&] {
    need(config_path, "config_path");
    need(out, "out");
    *out = nullptr;
    *out = new bs_trajectory{barostat::simulate_from_config(config_path)};
  });
}

void bs_trajectory_free(bs_trajectory* t) { delete t; }

size_t bs_trajectory_rows(const bs_trajectory* t) { return t ? t->rec.rows.size() : 0; }

bs_status bs_trajectory_row(const bs_trajectory* t, size_t i, double out[9]) {
  return guarded([&] {
    need(t, "trajectory");
    need(out, "out");
    barostat::require(i < t->rec.rows.size(), "row index out of range");
    const auto& r = t->rec.rows[i];
    const double v[9] = {r.t, r.mass, r.kinetic, r.potential_gap, r.e_rel, r.e_paper, r.dissipation_cum,
                         r.v_delta, r.w_delta};
    std::memcpy(out, v, sizeof v);
  });
}

bs_status bs_trajectory_fit(const bs_trajectory* t, bs_fit* out) {
  return guarded([&] {
    need(t, "trajectory");
    need(out, "out");
    fill_fit(barostat::fit_decay(t->rec), out);
  });
}

bs_status bs_trajectory_lyapunov(bs_trajectory* t, double* delta, int* sandwich_pass) {
  return guarded([&] {
    need(t, "trajectory");
    barostat::LyapunovConfig lc = barostat::calibrate(t->rec);
    const barostat::EquivalenceReport rep = barostat::check_equivalence(t->rec, lc);
    if (delta) *delta = rep.delta;
    if (sandwich_pass) *sandwich_pass = rep.sandwich_pass ? 1 : 0;
  });
}

bs_status bs_fit_series(const double* t, const double* e, size_t n, bs_fit* out) {
  return guarded([&] {
    need(t, "t");
    need(e, "e");
    need(out, "out");
    fill_fit(barostat::fit_decay(std::span<const double>(t, n), std::span<const double>(e, n)), out);
  });
}

bs_status bs_run(const char* command, const char* config_path, const char* out_dir, int threads, uint64_t seed,
                 int has_seed, const char* trajectory_path) {
  return guarded([&] {
    need(command, "command");
    barostat::RunRequest req;
    req.command = command;
    if (config_path) req.config_path = config_path;
    if (out_dir) req.out_dir = out_dir;
    req.threads = threads;
    if (has_seed) req.seed = seed;
    if (trajectory_path) req.trajectory_path = trajectory_path;
    barostat::run_command(req);
  });
}

}  // extern "C"
