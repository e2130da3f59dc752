#include "geoflux/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace geoflux {

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

double bump_mass() {
  static const double mass = simpson(
      [](double s) {
        double q = 1.0 - s * s;
        return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
      },
      -1.0, 1.0, 1 << 14);
  return mass;
}

// Cumulative table of the normalized bump, Simpson per step.
const std::vector<double>& bump_cdf_table() {
  static const std::vector<double> table = [] {
    const int n = 1 << 16;
    const double norm = 1.0 / bump_mass();
    auto p = [norm](double s) {
      double q = 1.0 - s * s;
      return q > 0.0 ? norm * std::exp(-1.0 / q) : 0.0;
    };
    std::vector<double> t(n + 1);
    const double h = 2.0 / n;
    double acc = 0.0;
    t[0] = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = -1.0 + i * h;
      acc += h / 6.0 * (p(a) + 4.0 * p(a + h / 2.0) + p(a + h));
      t[i + 1] = acc;
    }
    double scale = 1.0 / acc;  // pin the total mass to exactly 1
    for (double& v : t) v *= scale;
    return t;
  }();
  return table;
}

}  // namespace

SmoothingFn SmoothingFn::bump(double alpha) {
  if (!(alpha > 0.0 && alpha < kPi / 2.0))
    fail(Errc::invalid_argument, "SmoothingFn::bump: alpha must lie in (0, pi/2)");
  SmoothingFn f;
  f.alpha_ = alpha;
  double half = kPi / 2.0 - alpha;
  f.sup_norm_ = std::exp(-1.0 / (half * half));
  return f;
}

SmoothingFn SmoothingFn::constant(double value) {
  if (value < 0.0) fail(Errc::invalid_argument, "SmoothingFn::constant: negative value");
  SmoothingFn f;
  f.constant_ = true;
  f.value_ = value;
  f.sup_norm_ = value;
  return f;
}

double SmoothingFn::operator()(double theta) const {
  if (constant_) return value_;
  double folded = theta - kPi * std::floor(theta / kPi);  // [0, pi)
  double lo = folded - alpha_, hi = kPi - alpha_ - folded;
  if (lo <= 0.0 || hi <= 0.0) return 0.0;
  return std::exp(-1.0 / (lo * hi));
}

Mollifier::Mollifier() : norm_(1.0 / bump_mass()) {}

double Mollifier::operator()(double s) const {
  double q = 1.0 - s * s;
  if (q <= 0.0) return 0.0;
  return norm_ * std::exp(-1.0 / q);
}

double Mollifier::cdf(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const std::vector<double>& table = bump_cdf_table();
  double pos = (x + 1.0) / 2.0 * static_cast<double>(table.size() - 1);
  std::size_t i = std::min(table.size() - 2, static_cast<std::size_t>(pos));
  double frac = pos - static_cast<double>(i);
  return table[i] + frac * (table[i + 1] - table[i]);
}

LocalizerFn::LocalizerFn(DiskPoint center, double radius, std::shared_ptr<const SurfaceSpec> spec)
    : center_(center), radius_(radius), spec_(std::move(spec)) {
  if (radius_ <= 0.0) fail(Errc::invalid_argument, "LocalizerFn: radius must be positive");
  if (!spec_) fail(Errc::invalid_argument, "LocalizerFn: surface required");
  // When the support ball stays inside the polygon, no path shorter than the
  // radius can leave it, so the chart distance equals the surface distance
  // wherever f is nonzero. Side k bisects [0, g_k^{-1} 0], which bounds the
  // distance from the center to the boundary from below.
  double depth = 1e300;
  double d0 = hyperbolic_distance(DiskPoint{}, center_);
  for (const DiskPoint& t : spec_->dirichlet_origins)
    depth = std::min(depth, std::fabs(hyperbolic_distance(center_, t) - d0) / 2.0);
  chart_distance_suffices_ = radius_ <= depth;
}

LocalizerFn LocalizerFn::constant_one(std::shared_ptr<const SurfaceSpec> spec) {
  LocalizerFn f(DiskPoint{}, 1.0, std::move(spec));
  f.constant_one_ = true;
  return f;
}

double LocalizerFn::operator()(DiskPoint x) const {
  if (constant_one_) return 1.0;
  double d = chart_distance_suffices_ ? hyperbolic_distance(center_, x)
                                      : surface_distance(center_, x, *spec_);
  if (d >= radius_) return 0.0;
  double q = d / radius_;
  return std::exp(1.0 - 1.0 / (1.0 - q * q));
}

void validate(const KernelConfig& cfg) {
  if (!cfg.surface) fail(Errc::invalid_argument, "KernelConfig: surface required");
  if (cfg.delta <= 0.0 || cfg.rho <= 0.0)
    fail(Errc::invalid_argument, "KernelConfig: delta and rho must be positive");
  if (cfg.delta > cfg.rho / 2.0 + 1e-12)
    fail(Errc::invalid_argument, "KernelConfig: delta must satisfy delta <= rho/2");
  if (cfg.rho > cfg.surface->systole_lower_bound / 2.0 + 1e-12)
    fail(Errc::invalid_argument, "KernelConfig: rho must satisfy rho <= systole/2");
}

double kappa_phi(const SmoothingFn& phi, const SurfaceSpec& spec) {
  auto integrand = [&phi](double theta) { return phi(theta) * std::fabs(std::sin(theta)); };
  double total = 0.0;
  // Split at the kinks of |sin| and at the bump cutoffs.
  std::vector<double> knots{0.0, kPi, 2.0 * kPi};
  if (!phi.is_constant()) {
    double a = phi.alpha();
    knots.insert(knots.end(), {a, kPi - a, kPi + a, 2.0 * kPi - a});
  }
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] - knots[i] < 1e-14) continue;
    total += adaptive_simpson(integrand, knots[i], knots[i + 1], 1e-13);
  }
  return total / (2.0 * kPi * spec.area);
}

namespace {

constexpr double kReachMargin = 1e-6;

struct TranslateFilter {
  const SurfaceSpec* spec;
  std::vector<int> indices;  // neighbor translates near the base point
};

TranslateFilter nearby_translates(DiskPoint base, double reach, const SurfaceSpec& spec) {
  TranslateFilter f{&spec, {}};
  double cap = spec.circumradius + reach;
  for (std::size_t i = 0; i < spec.neighbor_translates.size(); ++i) {
    if (hyperbolic_distance(base, spec.neighbor_origins[i]) <= cap)
      f.indices.push_back(static_cast<int>(i));
  }
  return f;
}

Chord forward_segment(UnitTangent u, double delta) {
  return make_chord_with_length(u.base, flow(u, delta).base, delta);
}

Chord two_sided_segment(UnitTangent u, double delta) {
  return make_chord_with_length(flow(u, -delta).base, flow(u, delta).base, 2.0 * delta);
}

Chord map_chord(const MobiusMap& g, const Chord& c) {
  return Chord{g(c.p0), g(c.p1), c.length};
}

// Kernel arguments are tangents on the surface; bring any disk representative
// into the polygon chart. Interior points come back unchanged bit-for-bit.
UnitTangent chart_rep(UnitTangent u, const SurfaceSpec& spec) {
  auto [p, word] = reduce(u.base, spec);
  (void)p;
  if (word.letters.empty()) return u;
  return apply_isometry(word.map, u);
}

bool tangent_less(const UnitTangent& a, const UnitTangent& b) {
  auto key = [](const UnitTangent& u) {
    return std::tuple<double, double, double>(u.base.z.real(), u.base.z.imag(), u.dir);
  };
  return key(a) < key(b);
}

// Crossings of seg_u with deck images of seg_v; each surface crossing of the
// two projected segments appears exactly once (segments are shorter than the
// injectivity scale).
template <typename Fn>
void for_each_crossing(const Chord& seg_u, DiskPoint base_u, const Chord& seg_v, DiskPoint base_v,
                       double reach, const TranslateFilter& filter, Fn&& fn) {
  const SurfaceSpec& spec = *filter.spec;
  ChordHit hit;
  if (hyperbolic_distance(base_u, base_v) <= reach) {
    if (chord_intersect(seg_u, seg_v, &hit) == ChordIsect::crossing) fn(hit);
  }
  for (int idx : filter.indices) {
    const MobiusMap& g = spec.neighbor_translates[idx];
    DiskPoint moved_base = g(base_v);
    if (hyperbolic_distance(base_u, moved_base) > reach) continue;
    if (chord_intersect(seg_u, map_chord(g, seg_v), &hit) == ChordIsect::crossing) fn(hit);
  }
}

}  // namespace

namespace detail {

std::vector<SignedCrossing> two_sided_crossings(UnitTangent u, UnitTangent v,
                                                const KernelConfig& cfg) {
  const double delta = cfg.delta;
  u = chart_rep(u, *cfg.surface);
  v = chart_rep(v, *cfg.surface);
  Chord seg_u = two_sided_segment(u, delta);
  Chord seg_v = two_sided_segment(v, delta);
  double reach = 2.0 * delta + kReachMargin;
  TranslateFilter filter = nearby_translates(u.base, reach, *cfg.surface);
  std::vector<SignedCrossing> out;
  for_each_crossing(seg_u, u.base, seg_v, v.base, reach, filter, [&](const ChordHit& hit) {
    out.push_back(SignedCrossing{hit.frac1 * 2.0 * delta - delta, hit.frac2 * 2.0 * delta - delta,
                                 hit.theta, hit.point});
  });
  return out;
}

}  // namespace detail

double eval_H(UnitTangent u, UnitTangent v, const KernelConfig& cfg) {
  validate(cfg);
  u = chart_rep(u, *cfg.surface);
  v = chart_rep(v, *cfg.surface);
  if (tangent_less(v, u)) std::swap(u, v);  // symmetric kernel, canonical order
  const double delta = cfg.delta;
  Chord seg_u = forward_segment(u, delta);
  Chord seg_v = forward_segment(v, delta);
  double reach = 2.0 * delta + kReachMargin;
  TranslateFilter filter = nearby_translates(u.base, reach, *cfg.surface);
  double value = 0.0;
  for_each_crossing(seg_u, u.base, seg_v, v.base, reach, filter,
                    [&](const ChordHit& hit) { value += cfg.phi(hit.theta); });
  return value;
}

double eval_K(UnitTangent u, UnitTangent v, const KernelConfig& cfg) {
  validate(cfg);
  u = chart_rep(u, *cfg.surface);
  v = chart_rep(v, *cfg.surface);
  if (tangent_less(v, u)) std::swap(u, v);  // p(s)p(t) is order-free
  double value = 0.0;
  const double delta = cfg.delta;
  for (const auto& c : detail::two_sided_crossings(u, v, cfg))
    value += cfg.p(c.s / delta) * cfg.p(c.t / delta) * cfg.phi(c.theta) / (delta * delta);
  return value;
}

double eval_k_local(UnitTangent u, UnitTangent v, const KernelConfig& cfg) {
  validate(cfg);
  if (!cfg.f) fail(Errc::invalid_argument, "eval_k_local: localizer missing from config");
  u = chart_rep(u, *cfg.surface);
  v = chart_rep(v, *cfg.surface);
  if (tangent_less(v, u)) std::swap(u, v);
  double value = 0.0;
  const double delta = cfg.delta;
  for (const auto& c : detail::two_sided_crossings(u, v, cfg)) {
    auto [reduced, word] = reduce(c.location, *cfg.surface);
    (void)word;
    value += cfg.p(c.s / delta) * cfg.p(c.t / delta) * (*cfg.f)(reduced) * cfg.phi(c.theta) /
             (delta * delta);
  }
  return value;
}

namespace {

MonteCarloEstimate monte_carlo_mean(const std::function<double(UnitTangent)>& value,
                                    const SurfaceSpec& spec, long long n, RandomStream& rng) {
  double mean = 0.0, m2 = 0.0;
  for (long long i = 0; i < n; ++i) {
    UnitTangent v = liouville_sample(rng, spec);
    double x = value(v);
    double d = x - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (x - mean);
  }
  double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return MonteCarloEstimate{mean, std::sqrt(var / static_cast<double>(n)), n};
}

}  // namespace

MonteCarloEstimate row_mean(UnitTangent u, const KernelConfig& cfg, long long n,
                            RandomStream& rng) {
  validate(cfg);
  if (n < 100) fail(Errc::invalid_argument, "row_mean: n must be >= 100");
  u = chart_rep(u, *cfg.surface);
  const double delta = cfg.delta;
  Chord seg_u = forward_segment(u, delta);
  double reach = 2.0 * delta + kReachMargin;
  TranslateFilter filter = nearby_translates(u.base, reach, *cfg.surface);
  return monte_carlo_mean(
      [&](UnitTangent v) {
        double value = 0.0;
        for_each_crossing(seg_u, u.base, forward_segment(v, delta), v.base, reach, filter,
                          [&](const ChordHit& hit) { value += cfg.phi(hit.theta); });
        return value;
      },
      *cfg.surface, n, rng);
}

MonteCarloEstimate f_delta(UnitTangent u, const KernelConfig& cfg, long long n,
                           RandomStream& rng) {
  validate(cfg);
  if (!cfg.f) fail(Errc::invalid_argument, "f_delta: localizer missing from config");
  if (n < 100) fail(Errc::invalid_argument, "f_delta: n must be >= 100");
  double kp = kappa_phi(cfg.phi, *cfg.surface);
  auto est = monte_carlo_mean([&](UnitTangent v) { return eval_k_local(u, v, cfg); },
                              *cfg.surface, n, rng);
  return MonteCarloEstimate{est.estimate / kp, est.std_error / kp, est.n};
}

double u_statistic(const GeodesicTrace& trace, const KernelConfig& cfg) {
  validate(cfg);
  const double delta = cfg.delta;
  double ratio = trace.total_time / delta;
  long long n = std::llround(ratio);
  if (std::fabs(ratio - static_cast<double>(n)) > 1e-9 || n < 1)
    fail(Errc::invalid_argument, "u_statistic: T must be an integer multiple of delta");
  std::vector<UnitTangent> tangents;
  std::vector<Chord> segments;
  tangents.reserve(n);
  for (long long i = 0; i < n; ++i) {
    UnitTangent ui = tangent_at(trace, static_cast<double>(i) * delta);
    tangents.push_back(ui);
    segments.push_back(forward_segment(ui, delta));
  }
  double reach = 2.0 * delta + kReachMargin;
  double sum = 0.0;
  for (long long i = 0; i < n; ++i) {
    TranslateFilter filter = nearby_translates(tangents[i].base, reach, *cfg.surface);
    for (long long j = i + 1; j < n; ++j) {
      for_each_crossing(segments[i], tangents[i].base, segments[j], tangents[j].base, reach,
                        filter, [&](const ChordHit& hit) { sum += cfg.phi(hit.theta); });
    }
  }
  return sum;  // ordered pairs counted once = (1/2) * double sum
}

SandwichBounds sandwich(const GeodesicTrace& extended, double T, const KernelConfig& cfg,
                        double h) {
  validate(cfg);
  const double delta = cfg.delta;
  if (extended.total_time < T + 2.0 * delta - 1e-9)
    fail(Errc::invalid_argument, "sandwich: extended trace must cover gamma[-delta, T+delta]");
  if (h <= 0.0 || h > delta / 4.0 + 1e-12)
    fail(Errc::invalid_argument, "sandwich: quadrature step must satisfy h <= delta/4");

  CrossingSet set = self_intersections(extended);

  // int_a^b delta^-1 p((x - r)/delta) dr, exact through the mollifier CDF.
  auto mass = [&](double x, double a, double b) {
    return cfg.p.cdf((x - a) / delta) - cfg.p.cdf((x - b) / delta);
  };
  auto integral = [&](double a, double b) {
    double total = 0.0;
    for (const Crossing& c : set.crossings) {
      double s = c.s - delta, t = c.t - delta;  // gamma-time coordinates
      if (s > b + delta || t > b + delta || s < a - delta || t < a - delta) continue;
      double ms = mass(s, a, b);
      if (ms == 0.0) continue;
      double mt = mass(t, a, b);
      if (mt == 0.0) continue;
      total += cfg.phi(c.theta) * ms * mt;
    }
    return total;
  };

  SandwichBounds out;
  out.lower = integral(delta, T - delta);
  out.upper = integral(-delta, T + delta);
  for (const Crossing& c : set.crossings) {
    double s = c.s - delta, t = c.t - delta;
    double w = cfg.phi(c.theta);
    out.n_phi_extended += w;
    if (s >= 0.0 && t <= T) out.n_phi_inner += w;
    if (s >= 2.0 * delta && t <= T - 2.0 * delta) out.n_phi_core += w;
  }
  return out;
}

}  // namespace geoflux
