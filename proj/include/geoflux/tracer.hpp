#pragma once

#include <string>
#include <vector>

#include "geoflux/surface.hpp"

namespace geoflux {

// One maximal sub-arc of a traced geodesic inside the fundamental polygon.
// Time interval is half-open [t_begin, t_end); exit_word is the deck map
// applied where the arc leaves through a side (identity for the final arc).
struct Arc {
  UnitTangent entry;
  Chord chord;
  double t_begin = 0.0, t_end = 0.0;
  DeckWord exit_word;
  int exit_side = -1;
};

struct GeodesicTrace {
  UnitTangent u0;
  double total_time = 0.0;
  std::vector<Arc> arcs;
};

// Trace gamma[0, T] from u0 (base inside the closed polygon). Closed-form
// side-crossing solver; a trajectory passing within 1e-10 of a vertex raises
// Errc::vertex_hit.
GeodesicTrace trace(UnitTangent u0, double total_time, const SurfaceSpec& spec);

// Unit tangent at time s in [0, T] (half-open convention at junctions).
UnitTangent tangent_at(const GeodesicTrace& trace, double s);

// CSV: t_begin,t_end,entry_re,entry_im,entry_dir,exit_side per arc.
std::string trace_to_csv(const GeodesicTrace& trace);

}  // namespace geoflux
