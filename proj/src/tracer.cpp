#include "geoflux/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace geoflux {

namespace {

inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

constexpr double kVertexTol = 1e-10;
constexpr double kMinArcTime = 1e-12;

struct SideHit {
  double time = 0.0;
  int side = -1;
  DiskPoint point;
};

// First forward crossing of the ray from u with a polygon side segment.
bool next_side_hit(UnitTangent u, const SurfaceSpec& spec, SideHit* out) {
  GeodesicSupport ray = support_of_tangent(u);
  Complex k0 = ray.k0;
  Complex rdir = ray.ideal_b - k0;
  double rnorm = std::abs(rdir);
  rdir /= rnorm;

  bool found = false;
  SideHit best;
  for (const Side& s : spec.sides) {
    Complex a = s.support.k0, b = s.support.k1;
    Complex sdir = b - a;
    double det = cross(rdir, sdir);
    if (std::abs(det) < 1e-14) continue;
    Complex rhs = a - k0;
    double tr = cross(rhs, sdir) / det;  // Klein parameter along the ray
    if (tr <= 0.0) continue;
    double ts = cross(rhs, rdir) / det;  // normalized parameter along the side chord
    if (ts < -1e-12 || ts > 1.0 + 1e-12) continue;
    Complex w = k0 + tr * rdir;
    if (std::norm(w) >= 1.0) continue;
    DiskPoint x{from_klein(w)};
    // Forward only, in hyperbolic time.
    double t = hyperbolic_distance(u.base, x);
    if (t <= kMinArcTime) continue;
    if (!found || t < best.time) {
      found = true;
      best = SideHit{t, s.index, x};
    }
  }
  if (found) *out = best;
  return found;
}

void check_vertex(const SurfaceSpec& spec, DiskPoint x) {
  for (const DiskPoint& v : spec.polygon) {
    if (std::abs(v.z - x.z) < kVertexTol)
      fail(Errc::vertex_hit, "trace: trajectory hits a polygon vertex");
  }
}

}  // namespace

GeodesicTrace trace(UnitTangent u0, double total_time, const SurfaceSpec& spec) {
  if (total_time <= 0.0) fail(Errc::invalid_argument, "trace: T must be positive");
  if (!polygon_contains(spec, u0.base, 1e-9))
    fail(Errc::domain, "trace: start point outside the fundamental polygon");
  check_vertex(spec, u0.base);

  GeodesicTrace tr;
  tr.u0 = u0;
  tr.total_time = total_time;

  UnitTangent u = make_unit_tangent(u0.base, u0.dir);
  double t = 0.0;
  const std::size_t arc_cap = 1000 + static_cast<std::size_t>(64.0 * total_time);
  while (t < total_time) {
    double remaining = total_time - t;
    SideHit hit;
    bool has_hit = next_side_hit(u, spec, &hit);
    if (!has_hit || hit.time >= remaining) {
      UnitTangent end = flow(u, remaining);
      Arc arc;
      arc.entry = u;
      arc.chord = make_chord_with_length(u.base, end.base, remaining);
      arc.t_begin = t;
      arc.t_end = total_time;
      arc.exit_word = DeckWord::identity();
      arc.exit_side = -1;
      tr.arcs.push_back(arc);
      break;
    }
    check_vertex(spec, hit.point);
    GeodesicSupport ray = support_of_tangent(u);
    UnitTangent exit_tan{hit.point, wrap_two_pi(direction_toward_ideal(hit.point.z, ray.ideal_b))};

    Arc arc;
    arc.entry = u;
    arc.chord = make_chord_with_length(u.base, hit.point, hit.time);
    arc.t_begin = t;
    arc.t_end = t + hit.time;
    arc.exit_side = hit.side;
    arc.exit_word.letters = {hit.side};
    arc.exit_word.map = spec.generators[hit.side];
    tr.arcs.push_back(arc);

    u = apply_isometry(spec.generators[hit.side], exit_tan);
    t = arc.t_end;
    if (tr.arcs.size() > arc_cap) fail(Errc::internal, "trace: arc cap exceeded");
  }
  return tr;
}

UnitTangent tangent_at(const GeodesicTrace& trace, double s) {
  if (s < 0.0 || s > trace.total_time + 1e-12)
    fail(Errc::invalid_argument, "tangent_at: time outside [0, T]");
  s = std::min(s, trace.total_time);
  // Last arc with t_begin <= s (half-open intervals).
  auto it = std::upper_bound(trace.arcs.begin(), trace.arcs.end(), s,
                             [](double v, const Arc& a) { return v < a.t_begin; });
  const Arc& arc = (it == trace.arcs.begin()) ? trace.arcs.front() : *(it - 1);
  return flow(arc.entry, s - arc.t_begin);
}

std::string trace_to_csv(const GeodesicTrace& trace) {
  std::string out = "t_begin,t_end,entry_re,entry_im,entry_dir,exit_side\n";
  char line[256];
  for (const Arc& a : trace.arcs) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", a.t_begin, a.t_end,
                  a.entry.base.z.real(), a.entry.base.z.imag(), a.entry.dir, a.exit_side);
    out += line;
  }
  return out;
}

}  // namespace geoflux
