/* geoflux — self-intersection statistics of random geodesics on compact
 * hyperbolic surfaces.
 *
 * C interface of the shared library: opaque handles plus status codes. Every
 * function returns GFX_OK on success; on failure the thread-local message is
 * available through gfx_last_error().
 */
#ifndef GEOFLUX_H
#define GEOFLUX_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gfx_status {
  GFX_OK = 0,
  GFX_ERR_INVALID_ARGUMENT = 1,
  GFX_ERR_DOMAIN = 2,
  GFX_ERR_INVALID_ISOMETRY = 3,
  GFX_ERR_DEGENERATE_CHORD = 4,
  GFX_ERR_OVERLAP = 5,
  GFX_ERR_VERTEX_HIT = 6,
  GFX_ERR_REDUCTION_DIVERGED = 7,
  GFX_ERR_DEGENERATE_DATA = 8,
  GFX_ERR_NOT_FOUND = 9,
  GFX_ERR_IO = 10,
  GFX_ERR_INTERNAL = 11
} gfx_status;

typedef struct gfx_surface gfx_surface;
typedef struct gfx_trace gfx_trace;
typedef struct gfx_crossings gfx_crossings;
typedef struct gfx_config gfx_config;
typedef struct gfx_report gfx_report;

const char* gfx_version(void);

/* Message describing the most recent failure on this thread. */
const char* gfx_last_error(void);

/* ---- surfaces ---- */

gfx_status gfx_surface_create(const char* name, gfx_surface** out);
void gfx_surface_destroy(gfx_surface* s);
gfx_status gfx_surface_area(const gfx_surface* s, double* out);
gfx_status gfx_surface_systole_lower_bound(const gfx_surface* s, double* out);
gfx_status gfx_surface_inradius(const gfx_surface* s, double* out);
gfx_status gfx_surface_circumradius(const gfx_surface* s, double* out);
/* Project a disk point to the fundamental polygon. */
gfx_status gfx_surface_reduce(const gfx_surface* s, double re, double im, double* out_re,
                              double* out_im);
gfx_status gfx_surface_distance(const gfx_surface* s, double re1, double im1, double re2,
                                double im2, double* out);

/* ---- traces ---- */

gfx_status gfx_trace_create(const gfx_surface* s, double base_re, double base_im, double dir,
                            double total_time, gfx_trace** out);
void gfx_trace_destroy(gfx_trace* t);
gfx_status gfx_trace_arc_count(const gfx_trace* t, size_t* out);
gfx_status gfx_trace_tangent_at(const gfx_trace* t, double time, double* out_re, double* out_im,
                                double* out_dir);
gfx_status gfx_trace_write_csv(const gfx_trace* t, const char* path);

/* ---- self-intersections ---- */

/* mode 0: spatial hash (default); mode 1: naive all-pairs oracle. */
gfx_status gfx_crossings_compute(const gfx_trace* t, int mode, gfx_crossings** out);
void gfx_crossings_destroy(gfx_crossings* c);
gfx_status gfx_crossings_count(const gfx_crossings* c, size_t* out);
gfx_status gfx_crossings_get(const gfx_crossings* c, size_t index, double* s, double* t,
                             double* theta, double* loc_re, double* loc_im);
gfx_status gfx_crossings_write_csv(const gfx_crossings* c, const char* path);
/* N, N_phi, N_phi_f with the bump smoothing of cutoff alpha and a radial
 * localizer at (f_re, f_im) of radius f_radius (pass radius <= 0 for f == 1). */
gfx_status gfx_crossings_weighted_counts(const gfx_crossings* c, const gfx_surface* s,
                                         double alpha, double f_re, double f_im, double f_radius,
                                         long long* n, double* n_phi, double* n_phi_f);

/* ---- experiment configuration ---- */

gfx_status gfx_config_create(gfx_config** out);
void gfx_config_destroy(gfx_config* c);
/* Keys as in the config-file format: surface, t_grid, replicas, delta, alpha,
 * rho, f_center, f_radius, seed, out, threads, mc_samples, n_steps, t_star,
 * lags, mixing_replicas, sandwich_T, sandwich_traces, sandwich_deltas,
 * trace_T. Unknown keys are rejected. */
gfx_status gfx_config_set(gfx_config* c, const char* key, const char* value);
gfx_status gfx_config_load_file(gfx_config* c, const char* path);
gfx_status gfx_config_validate(const gfx_config* c);

/* ---- experiments ---- */

/* Runs one sub-command (slln, scaling, clt, kernel-check, sandwich, mixing,
 * counterexample, trace-dump), writing records/summary/report artifacts under
 * the configured output directory. */
gfx_status gfx_run(const gfx_config* c, const char* subcommand, gfx_report** out);
void gfx_report_destroy(gfx_report* r);
/* Plain-text key=value report; pointer valid until the report is destroyed. */
const char* gfx_report_text(const gfx_report* r);
/* 1 when every executed acceptance-style check passed, else 0. */
int gfx_report_passed(const gfx_report* r);

#ifdef __cplusplus
}
#endif

#endif /* GEOFLUX_H */
