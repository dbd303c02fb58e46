#ifndef BAROSTAT_H
#define BAROSTAT_H

/* C interface to the barostat library. All handles are opaque; every
 * function returning bs_status leaves a message retrievable with
 * bs_last_error() on the calling thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define BS_API __attribute__((visibility("default")))
#else
#define BS_API
#endif

typedef enum bs_status {
  BS_OK = 0,
  BS_INVALID_ARGUMENT = 1,
  BS_CONFIG = 2,
  BS_NUMERICAL = 3,
  BS_FIT_REFUSED = 4,
  BS_IO = 5,
  BS_INTERNAL = 6
} bs_status;

typedef enum bs_regime {
  BS_UNIQUE_POSITIVE = 0,
  BS_VACUUM_BOUNDARY = 1,
  BS_VACUUM_INTERIOR = 2,
  BS_CONTINUUM_RISK = 3
} bs_regime;

typedef struct bs_field bs_field;
typedef struct bs_steady bs_steady;
typedef struct bs_trajectory bs_trajectory;

typedef struct bs_fit {
  double t0;
  double t1;
  double rate;
  double r2;
  double prefactor;
  double decades;
  int envelope_pass;
} bs_fit;

typedef struct bs_steady_info {
  double k0;
  double m;
  double m_threshold;
  double residual;
  double min_rho_s;
  bs_regime regime;
} bs_steady_info;

BS_API const char* bs_version(void);
/* Message of the last failure on this thread ("" after success). */
BS_API const char* bs_last_error(void);
/* Same failure as a JSON object {"status", "exit_code", "message"[, "location"]}. */
BS_API const char* bs_last_error_json(void);
BS_API const char* bs_status_name(bs_status s);
/* Process exit code for a status: 0, 2 (config/argument/io), 3, 4, or 1. */
BS_API int bs_exit_code(bs_status s);

BS_API bs_status bs_set_threads(int n);
BS_API int bs_threads(void);

/* Fields. values may be NULL (zero fill); otherwise it holds nx*ny doubles,
 * index i*ny + j. */
BS_API bs_status bs_field_create_1d(int n, double length, const double* values, bs_field** out);
BS_API bs_status bs_field_create_2d(int nx, int ny, double lx, double ly, const double* values,
                                    bs_field** out);
BS_API void bs_field_free(bs_field* f);
BS_API size_t bs_field_size(const bs_field* f);
BS_API bs_status bs_field_values(const bs_field* f, double* out, size_t capacity);
BS_API bs_status bs_field_integrate(const bs_field* f, double* out);

/* Equilibrium. */
BS_API bs_status bs_mass_threshold(const bs_field* F, double gamma, double* out);
BS_API bs_status bs_steady_solve(const bs_field* F, double gamma, double m, bs_steady** out);
BS_API void bs_steady_free(bs_steady* s);
BS_API bs_status bs_steady_get_info(const bs_steady* s, bs_steady_info* out);
/* Copy of the equilibrium density as a new field. */
BS_API bs_status bs_steady_density(const bs_steady* s, bs_field** out);

/* Relative potential G(rho, rho_s) and theta(gamma). */
BS_API bs_status bs_relative_potential(double rho, double rho_s, double gamma, double* out);
BS_API bs_status bs_theta(double gamma, double* out);

/* Runs the simulation described by a JSON config file (same format as the
 * command line). */
BS_API bs_status bs_simulate(const char* config_path, bs_trajectory** out);
BS_API void bs_trajectory_free(bs_trajectory* t);
BS_API size_t bs_trajectory_rows(const bs_trajectory* t);
/* Nine columns: t, mass, kinetic, potential_gap, E_rel, E_paper,
 * dissipation_cum, V_delta, W_delta (V/W are NaN before bs_trajectory_lyapunov). */
BS_API bs_status bs_trajectory_row(const bs_trajectory* t, size_t i, double out[9]);
BS_API bs_status bs_trajectory_fit(const bs_trajectory* t, bs_fit* out);
/* Calibrates the constants, picks delta and fills V_delta/W_delta.
 * sandwich_pass receives 1 when 1/4 E <= V <= 2 E at every row. */
BS_API bs_status bs_trajectory_lyapunov(bs_trajectory* t, double* delta, int* sandwich_pass);

/* Transient detection and log-linear fit of a positive series. */
BS_API bs_status bs_fit_series(const double* t, const double* e, size_t n, bs_fit* out);

/* One command-line command: steady | simulate | verify | fit | sweep.
 * threads <= 0 keeps the current setting; has_seed = 0 keeps the config seed;
 * trajectory_path may be NULL. */
BS_API bs_status bs_run(const char* command, const char* config_path, const char* out_dir, int threads,
                        uint64_t seed, int has_seed, const char* trajectory_path);

#ifdef __cplusplus
}
#endif

#endif
