#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geoflux/tracer.hpp"

namespace geoflux {

// One transversal self-intersection of a traced segment: times s < t, folded
// crossing angle in (0, pi), location in the fundamental polygon.
struct Crossing {
  double s = 0.0, t = 0.0;
  double theta = 0.0;
  DiskPoint location;
};

struct CrossingSet {
  double total_time = 0.0;
  std::vector<Crossing> crossings;  // sorted lexicographically by (s, t)
};

enum class EnumerationMode { naive, spatial_hash };

// Crossings with time separation below this are junction artifacts (true
// self-intersections need at least the systole).
inline constexpr double kJunctionTimeTol = 1e-6;

CrossingSet self_intersections(const GeodesicTrace& trace,
                               EnumerationMode mode = EnumerationMode::spatial_hash);

// Raw mutual crossings between two traces (times on A and B, angle, location).
struct MutualCrossing {
  double time_a = 0.0, time_b = 0.0;
  double theta = 0.0;
  DiskPoint location;
};

std::vector<MutualCrossing> mutual_crossings(const GeodesicTrace& a, const GeodesicTrace& b);

// Sum of phi(theta_i) over transversal intersections of the two segments.
double mutual_intersections(const GeodesicTrace& a, const GeodesicTrace& b,
                            const std::function<double(double)>& phi);

struct WeightedCounts {
  long long n = 0;
  double n_phi = 0.0;
  double n_phi_f = 0.0;
};

WeightedCounts weighted_counts(const CrossingSet& crossings,
                               const std::function<double(double)>& phi,
                               const std::function<double(DiskPoint)>* localizer = nullptr);

// CSV: s,t,theta,loc_re,loc_im per crossing.
std::string crossings_to_csv(const CrossingSet& set);

}  // namespace geoflux
