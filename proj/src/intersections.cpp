#include "geoflux/intersections.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace geoflux {

namespace {

constexpr double kDedupTol = 1e-9;

struct Box {
  double xlo, xhi, ylo, yhi;
};

// Klein-model bounding box of an arc (straight segment there).
Box arc_box(const Arc& a) {
  Complex k0 = to_klein(a.chord.p0.z), k1 = to_klein(a.chord.p1.z);
  return Box{std::min(k0.real(), k1.real()), std::max(k0.real(), k1.real()),
             std::min(k0.imag(), k1.imag()), std::max(k0.imag(), k1.imag())};
}

bool boxes_touch(const Box& a, const Box& b) {
  return a.xlo <= b.xhi && b.xlo <= a.xhi && a.ylo <= b.yhi && b.ylo <= a.yhi;
}

// Candidate arc pairs via a uniform grid over the Klein square; every pair of
// arcs whose boxes share a cell is emitted exactly once.
std::vector<std::pair<int, int>> hash_candidates(const std::vector<Box>& boxes) {
  constexpr int kGrid = 24;
  const double cell = 2.0 / kGrid;
  std::vector<std::vector<int>> cells(kGrid * kGrid);
  auto clampi = [](int v) { return std::max(0, std::min(kGrid - 1, v)); };
  for (int i = 0; i < static_cast<int>(boxes.size()); ++i) {
    const Box& b = boxes[i];
    int x0 = clampi(static_cast<int>((b.xlo + 1.0) / cell));
    int x1 = clampi(static_cast<int>((b.xhi + 1.0) / cell));
    int y0 = clampi(static_cast<int>((b.ylo + 1.0) / cell));
    int y1 = clampi(static_cast<int>((b.yhi + 1.0) / cell));
    for (int gx = x0; gx <= x1; ++gx)
      for (int gy = y0; gy <= y1; ++gy) cells[gx * kGrid + gy].push_back(i);
  }
  int n = static_cast<int>(boxes.size());
  std::vector<std::uint64_t> seen((static_cast<std::size_t>(n) * n + 63) / 64);
  std::vector<std::pair<int, int>> pairs;
  for (const auto& bucket : cells) {
    for (std::size_t p = 0; p < bucket.size(); ++p) {
      for (std::size_t q = p + 1; q < bucket.size(); ++q) {
        int i = std::min(bucket[p], bucket[q]), j = std::max(bucket[p], bucket[q]);
        std::size_t bit = static_cast<std::size_t>(i) * n + j;
        if (seen[bit / 64] & (1ULL << (bit % 64))) continue;
        seen[bit / 64] |= 1ULL << (bit % 64);
        pairs.emplace_back(i, j);
      }
    }
  }
  return pairs;
}

void collect_pair(const GeodesicTrace& tr, int i, int j, std::vector<Crossing>* out) {
  const Arc& ai = tr.arcs[i];
  const Arc& aj = tr.arcs[j];
  ChordHit hit;
  ChordIsect r = chord_intersect(ai.chord, aj.chord, &hit);
  if (r != ChordIsect::crossing) return;  // overlaps between arcs of one trace cannot cross
  double s = ai.t_begin + hit.frac1 * (ai.t_end - ai.t_begin);
  double t = aj.t_begin + hit.frac2 * (aj.t_end - aj.t_begin);
  if (s > t) std::swap(s, t);
  if (t - s < kJunctionTimeTol) return;
  out->push_back(Crossing{s, t, hit.theta, hit.point});
}

void sort_dedup(std::vector<Crossing>* v) {
  std::sort(v->begin(), v->end(), [](const Crossing& a, const Crossing& b) {
    return std::tie(a.s, a.t) < std::tie(b.s, b.t);
  });
  std::vector<Crossing> out;
  out.reserve(v->size());
  for (const Crossing& c : *v) {
    if (!out.empty() && std::fabs(c.s - out.back().s) < kDedupTol &&
        std::fabs(c.t - out.back().t) < kDedupTol)
      continue;
    out.push_back(c);
  }
  v->swap(out);
}

}  // namespace

CrossingSet self_intersections(const GeodesicTrace& trace, EnumerationMode mode) {
  CrossingSet set;
  set.total_time = trace.total_time;
  int n = static_cast<int>(trace.arcs.size());
  if (mode == EnumerationMode::naive) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) collect_pair(trace, i, j, &set.crossings);
  } else {
    std::vector<Box> boxes;
    boxes.reserve(n);
    for (const Arc& a : trace.arcs) boxes.push_back(arc_box(a));
    for (auto [i, j] : hash_candidates(boxes)) collect_pair(trace, i, j, &set.crossings);
  }
  sort_dedup(&set.crossings);
  return set;
}

std::vector<MutualCrossing> mutual_crossings(const GeodesicTrace& a, const GeodesicTrace& b) {
  std::vector<MutualCrossing> out;
  std::vector<Box> bb;
  bb.reserve(b.arcs.size());
  for (const Arc& arc : b.arcs) bb.push_back(arc_box(arc));
  for (const Arc& ai : a.arcs) {
    Box ba = arc_box(ai);
    for (std::size_t j = 0; j < b.arcs.size(); ++j) {
      if (!boxes_touch(ba, bb[j])) continue;
      const Arc& aj = b.arcs[j];
      ChordHit hit;
      if (chord_intersect(ai.chord, aj.chord, &hit) != ChordIsect::crossing) continue;
      double ta = ai.t_begin + hit.frac1 * (ai.t_end - ai.t_begin);
      double tb = aj.t_begin + hit.frac2 * (aj.t_end - aj.t_begin);
      out.push_back(MutualCrossing{ta, tb, hit.theta, hit.point});
    }
  }
  // Order by keys symmetric under swapping the two traces so that the
  // resulting list (and any sum over it) is invariant under (a, b) -> (b, a).
  std::sort(out.begin(), out.end(), [](const MutualCrossing& x, const MutualCrossing& y) {
    auto key = [](const MutualCrossing& c) {
      return std::tuple<double, double, double>(c.time_a + c.time_b,
                                                std::fabs(c.time_a - c.time_b), c.theta);
    };
    return key(x) < key(y);
  });
  std::vector<MutualCrossing> dedup;
  dedup.reserve(out.size());
  for (const MutualCrossing& c : out) {
    if (!dedup.empty() &&
        std::fabs((c.time_a + c.time_b) - (dedup.back().time_a + dedup.back().time_b)) <
            kDedupTol &&
        std::fabs(std::fabs(c.time_a - c.time_b) -
                  std::fabs(dedup.back().time_a - dedup.back().time_b)) < kDedupTol)
      continue;
    dedup.push_back(c);
  }
  return dedup;
}

double mutual_intersections(const GeodesicTrace& a, const GeodesicTrace& b,
                            const std::function<double(double)>& phi) {
  double sum = 0.0;
  for (const MutualCrossing& c : mutual_crossings(a, b)) sum += phi(c.theta);
  return sum;
}

WeightedCounts weighted_counts(const CrossingSet& crossings,
                               const std::function<double(double)>& phi,
                               const std::function<double(DiskPoint)>* localizer) {
  WeightedCounts wc;
  for (const Crossing& c : crossings.crossings) {
    double p = phi(c.theta);
    wc.n += 1;
    wc.n_phi += p;
    wc.n_phi_f += (localizer ? (*localizer)(c.location) : 1.0) * p;
  }
  return wc;
}

std::string crossings_to_csv(const CrossingSet& set) {
  std::string out = "s,t,theta,loc_re,loc_im\n";
  char line[192];
  for (const Crossing& c : set.crossings) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g\n", c.s, c.t, c.theta,
                  c.location.z.real(), c.location.z.imag());
    out += line;
  }
  return out;
}

}  // namespace geoflux
