#include "geoflux/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace geoflux {

double wrap_two_pi(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r;
}

double fold_crossing_angle(double raw) {
  double r = raw - kPi * std::floor(raw / kPi);  // into [0, pi)
  double folded = std::min(r, kPi - r);
  return folded;
}

DiskPoint make_disk_point(Complex z) {
  if (std::norm(z) >= 1.0)
    fail(Errc::domain, "point not strictly inside the unit disk");
  return DiskPoint{z};
}

double hyperbolic_distance(DiskPoint p, DiskPoint q) {
  if (std::norm(p.z) >= 1.0 || std::norm(q.z) >= 1.0)
    fail(Errc::domain, "hyperbolic_distance: point on or outside the unit circle");
  Complex num = p.z - q.z;
  Complex den = 1.0 - std::conj(p.z) * q.z;
  double t = std::abs(num) / std::abs(den);
  if (t >= 1.0) t = std::nextafter(1.0, 0.0);
  return 2.0 * std::atanh(t);
}

UnitTangent make_unit_tangent(DiskPoint base, double dir) {
  return UnitTangent{base, wrap_two_pi(dir)};
}

MobiusMap::MobiusMap(Complex a, Complex b) : a_(a), b_(b) {
  if (std::abs(det() - 1.0) > kDetTol)
    fail(Errc::invalid_isometry, "MobiusMap: |a|^2 - |b|^2 != 1");
}

MobiusMap MobiusMap::unchecked(Complex a, Complex b) {
  MobiusMap m;
  m.a_ = a;
  m.b_ = b;
  return m;
}

MobiusMap MobiusMap::rotation(double phi) {
  // z -> e^{i phi} z, i.e. a = e^{i phi/2}, b = 0.
  return MobiusMap::unchecked(std::polar(1.0, phi / 2.0), Complex(0.0, 0.0));
}

MobiusMap MobiusMap::translation_to(DiskPoint z) {
  double s = 1.0 / std::sqrt(1.0 - std::norm(z.z));
  return MobiusMap::unchecked(Complex(s, 0.0), z.z * s);
}

MobiusMap MobiusMap::axis_translation(double axis_angle, double length) {
  double c = std::cosh(length / 2.0), s = std::sinh(length / 2.0);
  return MobiusMap::unchecked(Complex(c, 0.0), std::polar(s, axis_angle));
}

MobiusMap MobiusMap::normalized() const {
  double d = det();
  double s = 1.0 / std::sqrt(d);
  return MobiusMap::unchecked(a_ * s, b_ * s);
}

DiskPoint MobiusMap::operator()(DiskPoint p) const {
  Complex w = (a_ * p.z + b_) / (std::conj(b_) * p.z + std::conj(a_));
  return DiskPoint{w};
}

double MobiusMap::deriv_arg(Complex z) const {
  // f'(z) = det / (conj(b) z + conj(a))^2
  return -2.0 * std::arg(std::conj(b_) * z + std::conj(a_));
}

MobiusMap MobiusMap::operator*(const MobiusMap& o) const {
  return MobiusMap::unchecked(a_ * o.a_ + b_ * std::conj(o.b_),
                              a_ * o.b_ + b_ * std::conj(o.a_));
}

bool MobiusMap::near_identity(double tol) const {
  double d1 = std::abs(a_ - 1.0) + std::abs(b_);
  double d2 = std::abs(a_ + 1.0) + std::abs(b_);
  return std::min(d1, d2) <= tol;
}

double MobiusMap::distance(const MobiusMap& m1, const MobiusMap& m2) {
  double d1 = std::abs(m1.a_ - m2.a_) + std::abs(m1.b_ - m2.b_);
  double d2 = std::abs(m1.a_ + m2.a_) + std::abs(m1.b_ + m2.b_);
  return std::min(d1, d2);
}

UnitTangent apply_isometry(const MobiusMap& m, UnitTangent u) {
  if (std::abs(m.det() - 1.0) > kDetTol)
    fail(Errc::invalid_isometry, "apply_isometry: non-unimodular map");
  DiskPoint base = m(u.base);
  double dir = wrap_two_pi(u.dir + m.deriv_arg(u.base.z));
  return UnitTangent{base, dir};
}

UnitTangent flow(UnitTangent u, double s) {
  if (s == 0.0) return u;
  Complex z = u.base.z;
  Complex w = std::polar(std::tanh(s / 2.0), u.dir);
  Complex den = 1.0 + std::conj(z) * w;
  Complex base = (w + z) / den;
  double dir = wrap_two_pi(u.dir - 2.0 * std::arg(den));
  return UnitTangent{DiskPoint{base}, dir};
}

Chord make_chord(DiskPoint p0, DiskPoint p1) {
  double len = hyperbolic_distance(p0, p1);
  if (len < 1e-12) fail(Errc::degenerate_chord, "make_chord: coincident endpoints");
  return Chord{p0, p1, len};
}

Chord make_chord_with_length(DiskPoint p0, DiskPoint p1, double length) {
  if (length < 1e-12) fail(Errc::degenerate_chord, "make_chord: coincident endpoints");
  return Chord{p0, p1, length};
}

Complex to_klein(Complex z) { return 2.0 * z / (1.0 + std::norm(z)); }

Complex from_klein(Complex k) {
  double n = std::norm(k);
  if (n > 1.0) n = 1.0;
  return k / (1.0 + std::sqrt(1.0 - n));
}

namespace {

inline double dot(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }
inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Ideal endpoints of the Klein line through k0 with unit direction e.
void ideal_points(Complex k0, Complex e, Complex* behind, Complex* ahead) {
  double m = dot(k0, e);
  double disc = m * m + 1.0 - std::norm(k0);
  double root = std::sqrt(std::max(disc, 0.0));
  *ahead = k0 + (root - m) * e;
  *behind = k0 - (root + m) * e;
}

}  // namespace

GeodesicSupport support_of_chord(const Chord& c) {
  GeodesicSupport s;
  s.k0 = to_klein(c.p0.z);
  s.k1 = to_klein(c.p1.z);
  Complex d = s.k1 - s.k0;
  double n = std::abs(d);
  if (n < 1e-300) fail(Errc::degenerate_chord, "support_of_chord: zero-length chord");
  ideal_points(s.k0, d / n, &s.ideal_a, &s.ideal_b);
  return s;
}

GeodesicSupport support_of_tangent(UnitTangent u) {
  Complex z = u.base.z;
  Complex e = std::polar(1.0, u.dir);
  Complex den_f = 1.0 + std::conj(z) * e;
  Complex den_b = 1.0 - std::conj(z) * e;
  GeodesicSupport s;
  s.ideal_b = (e + z) / den_f;
  s.ideal_a = (z - e) / den_b;
  s.k0 = to_klein(z);
  s.k1 = s.ideal_b;  // ray toward the forward ideal point
  return s;
}

double direction_toward_ideal(Complex x, Complex ideal_b) {
  return std::arg((ideal_b - x) / (1.0 - std::conj(x) * ideal_b));
}

OrthoCircle ortho_circle(const GeodesicSupport& s) {
  OrthoCircle oc;
  Complex mid = 0.5 * (s.ideal_a + s.ideal_b);
  double m2 = std::norm(mid);
  if (m2 < 1e-24) {
    oc.is_line = true;
    oc.line_angle = std::arg(s.ideal_b);
    return oc;
  }
  // center at mid/|mid|^2 lies on the polar line of the chord of ideal points
  oc.center = mid / m2;
  oc.radius = std::sqrt(std::norm(oc.center) - 1.0);
  return oc;
}

namespace {

struct LineParam {
  Complex base, dir;  // Klein line: base + t dir, |dir| = 1
  double t0, t1;      // segment parameter interval (t0 < t1)
};

LineParam line_param(const GeodesicSupport& s) {
  LineParam lp;
  lp.base = s.k0;
  Complex d = s.k1 - s.k0;
  double n = std::abs(d);
  lp.dir = d / n;
  lp.t0 = 0.0;
  lp.t1 = n;
  return lp;
}

ChordIsect chord_intersect_ordered(const Chord& c1, const Chord& c2, ChordHit* hit,
                                   double eps_end) {
  GeodesicSupport s1 = support_of_chord(c1);
  GeodesicSupport s2 = support_of_chord(c2);

  // Same supporting geodesic? Ideal endpoint pairs match as sets.
  double same_fwd = std::abs(s1.ideal_a - s2.ideal_a) + std::abs(s1.ideal_b - s2.ideal_b);
  double same_rev = std::abs(s1.ideal_a - s2.ideal_b) + std::abs(s1.ideal_b - s2.ideal_a);
  if (std::min(same_fwd, same_rev) < 1e-12) {
    // Overlap test along the common line via the Klein parameter of c1.
    LineParam lp = line_param(s1);
    double u0 = dot(to_klein(c2.p0.z) - lp.base, lp.dir);
    double u1 = dot(to_klein(c2.p1.z) - lp.base, lp.dir);
    if (u0 > u1) std::swap(u0, u1);
    double lo = std::max(lp.t0, u0), hi = std::min(lp.t1, u1);
    if (hi - lo > 1e-12) return ChordIsect::overlap;
    return ChordIsect::none;
  }

  LineParam l1 = line_param(s1);
  LineParam l2 = line_param(s2);
  double det = cross(l1.dir, l2.dir);
  if (std::abs(det) < 1e-14) return ChordIsect::none;  // parallel in Klein: no transversal crossing
  Complex rhs = l2.base - l1.base;
  double t = cross(rhs, l2.dir) / det;
  Complex w = l1.base + t * l1.dir;
  if (std::norm(w) >= 1.0) return ChordIsect::none;

  DiskPoint x{from_klein(w)};
  double a1 = hyperbolic_distance(c1.p0, x), b1 = hyperbolic_distance(x, c1.p1);
  if (std::abs(a1 + b1 - c1.length) > 1e-9 * (1.0 + c1.length)) return ChordIsect::none;
  double a2 = hyperbolic_distance(c2.p0, x), b2 = hyperbolic_distance(x, c2.p1);
  if (std::abs(a2 + b2 - c2.length) > 1e-9 * (1.0 + c2.length)) return ChordIsect::none;

  double frac1 = a1 / c1.length, frac2 = a2 / c2.length;
  if (frac1 <= eps_end || frac1 >= 1.0 - eps_end) return ChordIsect::none;
  if (frac2 <= eps_end || frac2 >= 1.0 - eps_end) return ChordIsect::none;

  double d1 = direction_toward_ideal(x.z, s1.ideal_b);
  double d2 = direction_toward_ideal(x.z, s2.ideal_b);
  double theta = fold_crossing_angle(d2 - d1);
  if (theta < kTangentTol) return ChordIsect::none;

  if (hit) *hit = ChordHit{x, theta, frac1, frac2};
  return ChordIsect::crossing;
}

// Deterministic ordering key so that swapped arguments run identical arithmetic.
bool chord_less(const Chord& a, const Chord& b) {
  auto key = [](const Chord& c) {
    return std::array<double, 4>{c.p0.z.real(), c.p0.z.imag(), c.p1.z.real(), c.p1.z.imag()};
  };
  return key(a) < key(b);
}

}  // namespace

ChordIsect chord_intersect(const Chord& c1, const Chord& c2, ChordHit* hit, double eps_end) {
  if (chord_less(c2, c1)) {
    ChordHit h;
    ChordIsect r = chord_intersect_ordered(c2, c1, &h, eps_end);
    if (r == ChordIsect::crossing && hit)
      *hit = ChordHit{h.point, h.theta, h.frac2, h.frac1};
    return r;
  }
  return chord_intersect_ordered(c1, c2, hit, eps_end);
}

std::optional<ChordHit> chord_intersection(const Chord& c1, const Chord& c2, double eps_end) {
  ChordHit hit;
  switch (chord_intersect(c1, c2, &hit, eps_end)) {
    case ChordIsect::crossing:
      return hit;
    case ChordIsect::overlap:
      fail(Errc::overlap, "chord_intersection: arcs overlap on one geodesic");
    case ChordIsect::none:
    default:
      return std::nullopt;
  }
}

}  // namespace geoflux
