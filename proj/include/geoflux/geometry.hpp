#pragma once

#include <complex>
#include <optional>

#include "geoflux/errors.hpp"

namespace geoflux {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Fraction window at arc ends inside which chord crossings are reported as none;
// junction stitching is the consumer's job.
inline constexpr double kEndpointTol = 1e-9;

// Crossing angles folded closer than this to 0 count as tangential.
inline constexpr double kTangentTol = 1e-9;

inline constexpr double kDetTol = 1e-10;

double wrap_two_pi(double a);  // into [0, 2*pi)

// Unsigned angle between two unoriented tangent lines, in (0, pi/2] (0 if tangential).
double fold_crossing_angle(double raw);

// A point of the open Poincare disk.
struct DiskPoint {
  Complex z{0.0, 0.0};
};

DiskPoint make_disk_point(Complex z);  // rejects |z| >= 1

// d = 2 atanh |(p - q) / (1 - conj(p) q)|
double hyperbolic_distance(DiskPoint p, DiskPoint q);

// A point of the unit tangent bundle: base point plus direction angle in [0, 2*pi).
struct UnitTangent {
  DiskPoint base;
  double dir = 0.0;
};

UnitTangent make_unit_tangent(DiskPoint base, double dir);

// Disk-model isometry z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1.
class MobiusMap {
 public:
  MobiusMap() : a_(1.0, 0.0), b_(0.0, 0.0) {}
  MobiusMap(Complex a, Complex b);                  // validates unit determinant
  static MobiusMap unchecked(Complex a, Complex b); // skips validation (tests only)
  static MobiusMap identity() { return MobiusMap(); }
  static MobiusMap rotation(double phi);
  // 0 -> z with real positive derivative at 0.
  static MobiusMap translation_to(DiskPoint z);
  // Hyperbolic translation along the axis through 0 at angle `axis_angle`,
  // displacing by `length` toward e^{i axis_angle}.
  static MobiusMap axis_translation(double axis_angle, double length);

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  double det() const { return std::norm(a_) - std::norm(b_); }
  MobiusMap normalized() const;
  MobiusMap inverse() const { return MobiusMap::unchecked(std::conj(a_), -b_); }

  DiskPoint operator()(DiskPoint p) const;
  // arg of the derivative at z (the local tangent rotation).
  double deriv_arg(Complex z) const;
  // composition: (*this) applied after o
  MobiusMap operator*(const MobiusMap& o) const;

  // Projective comparison ((a,b) and (-a,-b) are the same map).
  bool near_identity(double tol) const;
  static double distance(const MobiusMap& m1, const MobiusMap& m2);

 private:
  Complex a_, b_;
};

// Rotates the direction by the argument of the map derivative; errors on
// non-unimodular maps.
UnitTangent apply_isometry(const MobiusMap& m, UnitTangent u);

// Unit-speed geodesic flow in the universal cover, signed time s.
UnitTangent flow(UnitTangent u, double s);

// A geodesic arc between two distinct interior points; length cached.
struct Chord {
  DiskPoint p0, p1;
  double length = 0.0;
};

Chord make_chord(DiskPoint p0, DiskPoint p1);
Chord make_chord_with_length(DiskPoint p0, DiskPoint p1, double length);

// Klein-model support of an oriented geodesic: the chord k0 -> k1 is straight,
// ideal endpoints are shared with the Poincare picture.
struct GeodesicSupport {
  Complex k0, k1;           // Klein images of the defining points
  Complex ideal_a, ideal_b; // |.| = 1; ideal_b lies ahead (beyond k1 / the ray direction)
};

Complex to_klein(Complex z);
Complex from_klein(Complex k);

GeodesicSupport support_of_chord(const Chord& c);
GeodesicSupport support_of_tangent(UnitTangent u);

// Direction angle at interior point x of the geodesic running toward ideal point b.
double direction_toward_ideal(Complex x, Complex ideal_b);

// Supporting circle orthogonal to the unit circle (diameter when is_line).
struct OrthoCircle {
  bool is_line = false;
  Complex center{0.0, 0.0};
  double radius = 0.0;
  double line_angle = 0.0;
};

OrthoCircle ortho_circle(const GeodesicSupport& s);

struct ChordHit {
  DiskPoint point;
  double theta = 0.0;  // in (0, pi)
  double frac1 = 0.0, frac2 = 0.0;  // arclength fractions along c1, c2
};

enum class ChordIsect { none, crossing, overlap };

// Transversal intersection of the interiors of two geodesic arcs.
// `overlap` flags arcs on one geodesic with overlapping interiors.
ChordIsect chord_intersect(const Chord& c1, const Chord& c2, ChordHit* hit,
                           double eps_end = kEndpointTol);

// Same, as the public operation: throws Errc::overlap on non-transversal overlap.
std::optional<ChordHit> chord_intersection(const Chord& c1, const Chord& c2,
                                           double eps_end = kEndpointTol);

}  // namespace geoflux
