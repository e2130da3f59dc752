#include "geoflux/surface.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace geoflux {

namespace {

inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

double interior_angle(DiskPoint prev, DiskPoint v, DiskPoint next) {
  GeodesicSupport sa = support_of_chord(make_chord(v, prev));
  GeodesicSupport sb = support_of_chord(make_chord(v, next));
  double da = direction_toward_ideal(v.z, sa.ideal_b);
  double db = direction_toward_ideal(v.z, sb.ideal_b);
  double diff = std::fabs(wrap_two_pi(da - db));
  if (diff > kPi) diff = 2.0 * kPi - diff;
  return diff;
}

// Translation length of a hyperbolic element: 2 acosh |Re a| (trace = 2 Re a).
double translation_length(const MobiusMap& m) {
  double half_trace = std::fabs(m.a().real());
  if (half_trace <= 1.0) return 0.0;
  return 2.0 * std::acosh(half_trace);
}

std::tuple<double, double, double, double> canon_key(const MobiusMap& m) {
  Complex a = m.a(), b = m.b();
  if (a.real() < 0.0 || (a.real() == 0.0 && a.imag() < 0.0)) {
    a = -a;
    b = -b;
  }
  auto r = [](double x) { return std::round(x * 1e9) / 1e9; };
  return {r(a.real()), r(a.imag()), r(b.real()), r(b.imag())};
}

// Breadth-first enumeration of reduced words, collecting every element with
// d(0, g 0) <= keep_radius.
std::vector<MobiusMap> enumerate_translates(const std::vector<MobiusMap>& gens, int max_len,
                                            double keep_radius) {
  int n = static_cast<int>(gens.size());
  std::map<std::tuple<double, double, double, double>, MobiusMap> seen;
  seen.emplace(canon_key(MobiusMap::identity()), MobiusMap::identity());
  std::vector<std::pair<MobiusMap, int>> frontier{{MobiusMap::identity(), -1}};
  std::vector<MobiusMap> kept;
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::pair<MobiusMap, int>> next;
    for (const auto& [m, last] : frontier) {
      for (int k = 0; k < n; ++k) {
        if (last >= 0 && (k + n / 2) % n == last) continue;
        MobiusMap m2 = (m * gens[k]).normalized();
        auto key = canon_key(m2);
        if (seen.count(key)) continue;
        seen.emplace(key, m2);
        next.emplace_back(m2, k);
        DiskPoint g0 = m2(DiskPoint{});
        if (hyperbolic_distance(DiskPoint{}, g0) <= keep_radius) kept.push_back(m2);
      }
    }
    frontier = std::move(next);
  }
  return kept;
}

}  // namespace

double surface_area(const std::vector<DiskPoint>& polygon) {
  std::size_t n = polygon.size();
  if (n < 3) fail(Errc::invalid_argument, "surface_area: polygon needs >= 3 vertices");
  double angle_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const DiskPoint& prev = polygon[(i + n - 1) % n];
    const DiskPoint& next = polygon[(i + 1) % n];
    angle_sum += interior_angle(prev, polygon[i], next);
  }
  double area = (static_cast<double>(n) - 2.0) * kPi - angle_sum;
  if (area <= 1e-12)
    fail(Errc::domain, "surface_area: angle sum >= (n-2)*pi, polygon is not hyperbolic");
  return area;
}

std::shared_ptr<const SurfaceSpec> build_bolza() {
  auto spec = std::make_shared<SurfaceSpec>();
  spec->name = "bolza";

  // Regular octagon, interior angles pi/4. cosh(inradius) = cot(pi/8),
  // cosh(circumradius) = cot(pi/8)^2; both from the right triangle at a
  // half-side (center / side midpoint / vertex).
  const double cot8 = 1.0 / std::tan(kPi / 8.0);
  spec->inradius = std::acosh(cot8);
  spec->circumradius = std::acosh(cot8 * cot8);
  const double rv = std::tanh(spec->circumradius / 2.0);  // = 2^{-1/4}

  for (int j = 0; j < 8; ++j)
    spec->polygon.push_back(DiskPoint{std::polar(rv, (2.0 * j + 1.0) * kPi / 8.0)});

  // Side k spans vertices v_{k-1}, v_k about midpoint direction k*pi/4; its
  // pairing generator translates along that direction's axis by twice the
  // inradius, onto the opposite side.
  const double step = 2.0 * spec->inradius;
  for (int k = 0; k < 8; ++k)
    spec->generators.push_back(MobiusMap::axis_translation((k + 4) * kPi / 4.0, step));

  for (int k = 0; k < 8; ++k) {
    Side s;
    s.index = k;
    s.paired = (k + 4) % 8;
    s.v0 = spec->polygon[(k + 7) % 8];
    s.v1 = spec->polygon[k];
    s.midpoint = DiskPoint{std::polar(std::tanh(spec->inradius / 2.0), k * kPi / 4.0)};
    s.support = support_of_chord(make_chord(s.v0, s.v1));
    spec->sides.push_back(s);
  }

  spec->area = surface_area(spec->polygon);

  // Correctness gates for the constructed group.
  for (int k = 0; k < 8; ++k) {
    const Side& s = spec->sides[k];
    const Side& t = spec->sides[s.paired];
    DiskPoint i0 = spec->generators[k](s.v0);
    DiskPoint i1 = spec->generators[k](s.v1);
    double err = std::min(std::abs(i0.z - t.v0.z) + std::abs(i1.z - t.v1.z),
                          std::abs(i0.z - t.v1.z) + std::abs(i1.z - t.v0.z));
    if (err > 1e-8) fail(Errc::internal, "build_bolza: side pairing mismatch");
  }
  // Vertex-cycle relation g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = id.
  MobiusMap rel;
  for (int k : {0, 5, 2, 7, 4, 1, 6, 3}) rel = (rel * spec->generators[k]).normalized();
  if (!rel.near_identity(1e-8)) fail(Errc::internal, "build_bolza: relation violated");

  // Short-word translation-length scan; the systole is attained by the
  // generators themselves.
  double systole = 2.0 * std::acosh(1.0 + std::sqrt(2.0));
  for (const MobiusMap& g : enumerate_translates(spec->generators, 4, 1e9)) {
    double len = translation_length(g);
    if (len > 1e-9 && len < systole) systole = len;
  }
  spec->systole_lower_bound = systole;

  spec->neighbor_translates =
      enumerate_translates(spec->generators, 5, 2.0 * spec->circumradius + 2.0);
  for (const MobiusMap& g : spec->neighbor_translates)
    spec->neighbor_origins.push_back(g(DiskPoint{}));
  for (int k = 0; k < 8; ++k)
    spec->dirichlet_origins.push_back(spec->generators[(k + 4) % 8](DiskPoint{}));

  return spec;
}

std::shared_ptr<const SurfaceSpec> surface_by_name(const std::string& name) {
  if (name == "bolza") {
    static std::shared_ptr<const SurfaceSpec> cached = build_bolza();
    return cached;
  }
  fail(Errc::not_found, "unknown surface: " + name);
}

bool polygon_contains(const SurfaceSpec& spec, DiskPoint z, double tol) {
  Complex k = to_klein(z.z);
  for (const Side& s : spec.sides) {
    Complex a = s.support.k0, b = s.support.k1;
    // Interior lies on the origin side of each Klein side line.
    double side_origin = cross(b - a, -a);
    double side_z = cross(b - a, k - a);
    if (side_z * (side_origin > 0.0 ? 1.0 : -1.0) < -tol) return false;
  }
  return true;
}

std::pair<DiskPoint, DeckWord> reduce(DiskPoint z, const SurfaceSpec& spec) {
  if (std::norm(z.z) >= 1.0) fail(Errc::domain, "reduce: point outside the open disk");
  constexpr int kMaxIter = 10000;
  constexpr double kSideTol = 1e-12;
  DeckWord word;
  DiskPoint cur = z;
  int n = static_cast<int>(spec.generators.size());
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double d0 = hyperbolic_distance(DiskPoint{}, cur);
    int best = -1;
    for (int k = 0; k < n; ++k) {
      // Beyond side k exactly when the image of 0 under g_k^{-1} is closer.
      double dk = hyperbolic_distance(spec.dirichlet_origins[k], cur);
      if (dk < d0 - kSideTol) {
        best = k;
        break;  // first-side-index tie order
      }
    }
    if (best < 0) return {cur, word};
    cur = spec.generators[best](cur);
    word.letters.push_back(best);
    word.map = (spec.generators[best] * word.map).normalized();
  }
  fail(Errc::reduction_diverged, "reduce: iteration cap exceeded");
}

UnitTangent reduce_tangent(UnitTangent u, const SurfaceSpec& spec) {
  auto [p, word] = reduce(u.base, spec);
  (void)p;
  return apply_isometry(word.map, u);
}

double surface_distance(DiskPoint x, DiskPoint y, const SurfaceSpec& spec) {
  double best = hyperbolic_distance(x, y);
  for (const MobiusMap& g : spec.neighbor_translates) {
    double d = hyperbolic_distance(x, g(y));
    if (d < best) best = d;
  }
  return best;
}

UnitTangent liouville_sample(RandomStream& rng, const SurfaceSpec& spec) {
  const double sh = std::sinh(spec.circumradius / 2.0);
  for (;;) {
    double s = 2.0 * std::asinh(std::sqrt(rng.uniform()) * sh);
    double psi = rng.uniform(0.0, 2.0 * kPi);
    DiskPoint z{std::polar(std::tanh(s / 2.0), psi)};
    double dir = rng.uniform(0.0, 2.0 * kPi);
    if (polygon_contains(spec, z, 0.0)) return UnitTangent{z, dir};
  }
}

}  // namespace geoflux
