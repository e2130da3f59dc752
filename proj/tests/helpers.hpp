#pragma once

#include <cmath>

#include "geoflux/random.hpp"
#include "geoflux/surface.hpp"

namespace geoflux::testing {

inline DiskPoint random_point(RandomStream& rng, double max_radius = 0.9) {
  double r = max_radius * std::sqrt(rng.uniform());
  return DiskPoint{std::polar(r, rng.uniform(0.0, 2.0 * kPi))};
}

inline UnitTangent random_tangent(RandomStream& rng, double max_radius = 0.9) {
  return UnitTangent{random_point(rng, max_radius), rng.uniform(0.0, 2.0 * kPi)};
}

inline MobiusMap random_isometry(RandomStream& rng, double max_radius = 0.9) {
  return MobiusMap::translation_to(random_point(rng, max_radius)) *
         MobiusMap::rotation(rng.uniform(0.0, 2.0 * kPi));
}

// Two chords guaranteed to cross transversally at `p` (angles at least 0.2
// apart), extended by random arms on both sides.
inline std::pair<Chord, Chord> crossing_chords(RandomStream& rng, DiskPoint p) {
  double d1 = rng.uniform(0.0, 2.0 * kPi);
  double d2 = d1 + rng.uniform(0.2, kPi - 0.2);
  auto arm = [&](double dir) {
    double a = rng.uniform(0.2, 0.8), b = rng.uniform(0.2, 0.8);
    UnitTangent u{p, wrap_two_pi(dir)};
    return make_chord(flow(u, -a).base, flow(u, b).base);
  };
  return {arm(d1), arm(d2)};
}

}  // namespace geoflux::testing
