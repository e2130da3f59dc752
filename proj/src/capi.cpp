#include "geoflux.h"

#include <cstring>
#include <memory>
#include <string>

#include "geoflux/experiments.hpp"

namespace {

thread_local std::string g_last_error;

gfx_status status_of(geoflux::Errc code) {
  using geoflux::Errc;
  switch (code) {
    case Errc::invalid_argument: return GFX_ERR_INVALID_ARGUMENT;
    case Errc::domain: return GFX_ERR_DOMAIN;
    case Errc::invalid_isometry: return GFX_ERR_INVALID_ISOMETRY;
    case Errc::degenerate_chord: return GFX_ERR_DEGENERATE_CHORD;
    case Errc::overlap: return GFX_ERR_OVERLAP;
    case Errc::vertex_hit: return GFX_ERR_VERTEX_HIT;
    case Errc::reduction_diverged: return GFX_ERR_REDUCTION_DIVERGED;
    case Errc::degenerate_data: return GFX_ERR_DEGENERATE_DATA;
    case Errc::not_found: return GFX_ERR_NOT_FOUND;
    case Errc::io: return GFX_ERR_IO;
    case Errc::internal: return GFX_ERR_INTERNAL;
  }
  return GFX_ERR_INTERNAL;
}

template <typename Fn>
gfx_status guarded(Fn&& fn) {
  try {
    fn();
    return GFX_OK;
  } catch (const geoflux::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GFX_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GFX_ERR_INTERNAL;
  }
}

gfx_status require(bool ok, const char* what) {
  if (ok) return GFX_OK;
  g_last_error = what;
  return GFX_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct gfx_surface {
  std::shared_ptr<const geoflux::SurfaceSpec> spec;
};

struct gfx_trace {
  std::shared_ptr<const geoflux::SurfaceSpec> spec;
  geoflux::GeodesicTrace trace;
};

struct gfx_crossings {
  geoflux::CrossingSet set;
};

struct gfx_config {
  geoflux::ExperimentConfig config;
};

struct gfx_report {
  geoflux::Report report;
  std::string text;
};

extern "C" {

const char* gfx_version(void) { return "0.1.0"; }

const char* gfx_last_error(void) { return g_last_error.c_str(); }

gfx_status gfx_surface_create(const char* name, gfx_surface** out) {
  if (auto st = require(name && out, "gfx_surface_create: null argument")) return st;
  return guarded([&] { *out = new gfx_surface{geoflux::surface_by_name(name)}; });
}

void gfx_surface_destroy(gfx_surface* s) { delete s; }

gfx_status gfx_surface_area(const gfx_surface* s, double* out) {
  if (auto st = require(s && out, "gfx_surface_area: null argument")) return st;
  *out = s->spec->area;
  return GFX_OK;
}

gfx_status gfx_surface_systole_lower_bound(const gfx_surface* s, double* out) {
  if (auto st = require(s && out, "gfx_surface_systole_lower_bound: null argument")) return st;
  *out = s->spec->systole_lower_bound;
  return GFX_OK;
}

gfx_status gfx_surface_inradius(const gfx_surface* s, double* out) {
  if (auto st = require(s && out, "gfx_surface_inradius: null argument")) return st;
  *out = s->spec->inradius;
  return GFX_OK;
}

gfx_status gfx_surface_circumradius(const gfx_surface* s, double* out) {
  if (auto st = require(s && out, "gfx_surface_circumradius: null argument")) return st;
  *out = s->spec->circumradius;
  return GFX_OK;
}

gfx_status gfx_surface_reduce(const gfx_surface* s, double re, double im, double* out_re,
                              double* out_im) {
  if (auto st = require(s && out_re && out_im, "gfx_surface_reduce: null argument")) return st;
  return guarded([&] {
    auto [p, word] = geoflux::reduce(geoflux::DiskPoint{{re, im}}, *s->spec);
    (void)word;
    *out_re = p.z.real();
    *out_im = p.z.imag();
  });
}

gfx_status gfx_surface_distance(const gfx_surface* s, double re1, double im1, double re2,
                                double im2, double* out) {
  if (auto st = require(s && out, "gfx_surface_distance: null argument")) return st;
  return guarded([&] {
    *out = geoflux::surface_distance(geoflux::DiskPoint{{re1, im1}},
                                     geoflux::DiskPoint{{re2, im2}}, *s->spec);
  });
}

gfx_status gfx_trace_create(const gfx_surface* s, double base_re, double base_im, double dir,
                            double total_time, gfx_trace** out) {
  if (auto st = require(s && out, "gfx_trace_create: null argument")) return st;
  return guarded([&] {
    geoflux::UnitTangent u0 =
        geoflux::make_unit_tangent(geoflux::make_disk_point({base_re, base_im}), dir);
    *out = new gfx_trace{s->spec, geoflux::trace(u0, total_time, *s->spec)};
  });
}

void gfx_trace_destroy(gfx_trace* t) { delete t; }

gfx_status gfx_trace_arc_count(const gfx_trace* t, size_t* out) {
  if (auto st = require(t && out, "gfx_trace_arc_count: null argument")) return st;
  *out = t->trace.arcs.size();
  return GFX_OK;
}

gfx_status gfx_trace_tangent_at(const gfx_trace* t, double time, double* out_re, double* out_im,
                                double* out_dir) {
  if (auto st = require(t && out_re && out_im && out_dir, "gfx_trace_tangent_at: null argument"))
    return st;
  return guarded([&] {
    geoflux::UnitTangent u = geoflux::tangent_at(t->trace, time);
    *out_re = u.base.z.real();
    *out_im = u.base.z.imag();
    *out_dir = u.dir;
  });
}

gfx_status gfx_trace_write_csv(const gfx_trace* t, const char* path) {
  if (auto st = require(t && path, "gfx_trace_write_csv: null argument")) return st;
  return guarded([&] {
    std::string csv = geoflux::trace_to_csv(t->trace);
    FILE* f = std::fopen(path, "wb");
    if (!f) geoflux::fail(geoflux::Errc::io, std::string("cannot open: ") + path);
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
  });
}

gfx_status gfx_crossings_compute(const gfx_trace* t, int mode, gfx_crossings** out) {
  if (auto st = require(t && out, "gfx_crossings_compute: null argument")) return st;
  return guarded([&] {
    auto m = mode == 1 ? geoflux::EnumerationMode::naive : geoflux::EnumerationMode::spatial_hash;
    *out = new gfx_crossings{geoflux::self_intersections(t->trace, m)};
  });
}

void gfx_crossings_destroy(gfx_crossings* c) { delete c; }

gfx_status gfx_crossings_count(const gfx_crossings* c, size_t* out) {
  if (auto st = require(c && out, "gfx_crossings_count: null argument")) return st;
  *out = c->set.crossings.size();
  return GFX_OK;
}

gfx_status gfx_crossings_get(const gfx_crossings* c, size_t index, double* s, double* t,
                             double* theta, double* loc_re, double* loc_im) {
  if (auto st = require(c && s && t && theta && loc_re && loc_im,
                        "gfx_crossings_get: null argument"))
    return st;
  if (index >= c->set.crossings.size()) {
    g_last_error = "gfx_crossings_get: index out of range";
    return GFX_ERR_INVALID_ARGUMENT;
  }
  const geoflux::Crossing& x = c->set.crossings[index];
  *s = x.s;
  *t = x.t;
  *theta = x.theta;
  *loc_re = x.location.z.real();
  *loc_im = x.location.z.imag();
  return GFX_OK;
}

gfx_status gfx_crossings_write_csv(const gfx_crossings* c, const char* path) {
  if (auto st = require(c && path, "gfx_crossings_write_csv: null argument")) return st;
  return guarded([&] {
    std::string csv = geoflux::crossings_to_csv(c->set);
    FILE* f = std::fopen(path, "wb");
    if (!f) geoflux::fail(geoflux::Errc::io, std::string("cannot open: ") + path);
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
  });
}

gfx_status gfx_crossings_weighted_counts(const gfx_crossings* c, const gfx_surface* s,
                                         double alpha, double f_re, double f_im, double f_radius,
                                         long long* n, double* n_phi, double* n_phi_f) {
  if (auto st = require(c && s && n && n_phi && n_phi_f,
                        "gfx_crossings_weighted_counts: null argument"))
    return st;
  return guarded([&] {
    geoflux::SmoothingFn phi = geoflux::SmoothingFn::bump(alpha);
    std::function<double(double)> phi_fn = [&phi](double th) { return phi(th); };
    if (f_radius > 0.0) {
      geoflux::LocalizerFn f(geoflux::DiskPoint{{f_re, f_im}}, f_radius, s->spec);
      std::function<double(geoflux::DiskPoint)> f_fn = [&f](geoflux::DiskPoint p) { return f(p); };
      auto wc = geoflux::weighted_counts(c->set, phi_fn, &f_fn);
      *n = wc.n;
      *n_phi = wc.n_phi;
      *n_phi_f = wc.n_phi_f;
    } else {
      auto wc = geoflux::weighted_counts(c->set, phi_fn, nullptr);
      *n = wc.n;
      *n_phi = wc.n_phi;
      *n_phi_f = wc.n_phi_f;
    }
  });
}

gfx_status gfx_config_create(gfx_config** out) {
  if (auto st = require(out != nullptr, "gfx_config_create: null argument")) return st;
  *out = new gfx_config{};
  return GFX_OK;
}

void gfx_config_destroy(gfx_config* c) { delete c; }

gfx_status gfx_config_set(gfx_config* c, const char* key, const char* value) {
  if (auto st = require(c && key && value, "gfx_config_set: null argument")) return st;
  return guarded([&] { geoflux::apply_config_line(&c->config, key, value); });
}

gfx_status gfx_config_load_file(gfx_config* c, const char* path) {
  if (auto st = require(c && path, "gfx_config_load_file: null argument")) return st;
  return guarded([&] { geoflux::load_config_file(&c->config, path); });
}

gfx_status gfx_config_validate(const gfx_config* c) {
  if (auto st = require(c != nullptr, "gfx_config_validate: null argument")) return st;
  return guarded([&] { geoflux::validate(c->config); });
}

gfx_status gfx_run(const gfx_config* c, const char* subcommand, gfx_report** out) {
  if (auto st = require(c && subcommand && out, "gfx_run: null argument")) return st;
  return guarded([&] {
    auto rep = std::make_unique<gfx_report>();
    rep->report = geoflux::run_subcommand(subcommand, c->config);
    rep->text = rep->report.text();
    *out = rep.release();
  });
}

void gfx_report_destroy(gfx_report* r) { delete r; }

const char* gfx_report_text(const gfx_report* r) { return r ? r->text.c_str() : ""; }

int gfx_report_passed(const gfx_report* r) { return r && r->report.passed() ? 1 : 0; }

}  // extern "C"
