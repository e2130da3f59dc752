#pragma once

#include <memory>
#include <string>
#include <vector>

#include "geoflux/geometry.hpp"
#include "geoflux/random.hpp"

namespace geoflux {

// Deck transformation recorded as a word in the side-pairing generators;
// letters in application order: map = g[letters.back()] o ... o g[letters.front()].
struct DeckWord {
  MobiusMap map;
  std::vector<int> letters;
  static DeckWord identity() { return DeckWord{}; }
};

struct Side {
  int index = 0;
  int paired = 0;      // generator `index` maps this side onto side `paired`
  DiskPoint v0, v1;    // endpoints (vertices index-1, index of the polygon)
  DiskPoint midpoint;
  GeodesicSupport support;
};

// A compact hyperbolic surface presented as a Fuchsian group with a centered
// fundamental polygon (Dirichlet domain about the origin).
struct SurfaceSpec {
  std::string name;
  std::vector<MobiusMap> generators;  // size 2g': generators[k+n/2] = generators[k]^{-1}
  std::vector<DiskPoint> polygon;     // vertices in ccw order
  std::vector<Side> sides;
  double area = 0.0;
  double inradius = 0.0;
  double circumradius = 0.0;
  double systole_lower_bound = 0.0;
  // Nontrivial deck maps g with d(0, g 0) <= 2*circumradius + 2; closed under
  // inverses. Enough to resolve surface distances up to 2.0.
  std::vector<MobiusMap> neighbor_translates;
  std::vector<DiskPoint> neighbor_origins;   // g(0) for each neighbor translate
  std::vector<DiskPoint> dirichlet_origins;  // generators[k]^{-1}(0), beyond side k
};

// The genus-2 Bolza surface: regular hyperbolic octagon, all interior angles
// pi/4, opposite sides paired by hyperbolic translations through the center.
std::shared_ptr<const SurfaceSpec> build_bolza();

std::shared_ptr<const SurfaceSpec> surface_by_name(const std::string& name);

// Gauss-Bonnet area (n-2)*pi - sum of interior angles of a geodesic polygon.
double surface_area(const std::vector<DiskPoint>& polygon);

bool polygon_contains(const SurfaceSpec& spec, DiskPoint z, double tol = 1e-9);

// Projection to the fundamental polygon: returns the reduced point and the
// deck word w with w(z) = reduced.
std::pair<DiskPoint, DeckWord> reduce(DiskPoint z, const SurfaceSpec& spec);

UnitTangent reduce_tangent(UnitTangent u, const SurfaceSpec& spec);

// Distance on the surface (min over neighbor deck translates; exact for
// values up to 2.0).
double surface_distance(DiskPoint x, DiskPoint y, const SurfaceSpec& spec);

// Liouville draw: base uniform in hyperbolic area on the polygon, direction
// uniform on [0, 2*pi), independent.
UnitTangent liouville_sample(RandomStream& rng, const SurfaceSpec& spec);

}  // namespace geoflux
