#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "geoflux/intersections.hpp"
#include "geoflux/surface.hpp"

namespace geoflux {

// Even, pi-periodic smoothing weight on crossing angles. The bump variant
// vanishes on [-alpha, alpha] and is positive on (alpha, pi - alpha).
class SmoothingFn {
 public:
  static SmoothingFn bump(double alpha);
  static SmoothingFn constant(double value);  // admissible for kappa_phi only

  double operator()(double theta) const;
  double alpha() const { return alpha_; }
  double sup_norm() const { return sup_norm_; }
  bool is_constant() const { return constant_; }

 private:
  SmoothingFn() = default;
  double alpha_ = 0.0;
  double sup_norm_ = 0.0;
  bool constant_ = false;
  double value_ = 0.0;
};

// Even C-infinity probability density supported on [-1, 1], nonincreasing on
// [0, 1]: p(s) = c exp(-1/(1-s^2)), normalized by quadrature.
class Mollifier {
 public:
  Mollifier();
  double operator()(double s) const;
  // int_{-1}^{x} p, exact 0/1 outside the support.
  double cdf(double x) const;

 private:
  double norm_ = 0.0;
};

// Smooth bump on the surface supported on the metric ball B(center, radius),
// equal to 1 at the center.
class LocalizerFn {
 public:
  LocalizerFn(DiskPoint center, double radius, std::shared_ptr<const SurfaceSpec> spec);
  static LocalizerFn constant_one(std::shared_ptr<const SurfaceSpec> spec);
  double operator()(DiskPoint x) const;
  DiskPoint center() const { return center_; }
  double radius() const { return radius_; }

 private:
  DiskPoint center_;
  double radius_ = 0.0;
  std::shared_ptr<const SurfaceSpec> spec_;
  bool chart_distance_suffices_ = false;
  bool constant_one_ = false;
};

struct KernelConfig {
  double delta = 0.1;
  SmoothingFn phi = SmoothingFn::bump(0.3);
  Mollifier p;
  std::optional<LocalizerFn> f;
  double rho = 0.5;
  std::shared_ptr<const SurfaceSpec> surface;
};

// Validates delta <= rho/2 and rho <= systole_lower_bound/2.
void validate(const KernelConfig& cfg);

// kappa_phi = (2 pi |M|)^{-1} \int_0^{2pi} phi |sin| dtheta, by quadrature.
double kappa_phi(const SmoothingFn& phi, const SurfaceSpec& spec);

// phi(theta) if the length-delta geodesic segments from u and v cross
// transversally at angle theta, else 0.
double eval_H(UnitTangent u, UnitTangent v, const KernelConfig& cfg);

// Smoothed kernel: delta^{-2} p(s/delta) p(t/delta) phi(theta) at the unique
// transversal crossing of the two-sided geodesics, signed distances s, t.
double eval_K(UnitTangent u, UnitTangent v, const KernelConfig& cfg);

// As eval_K with the extra localizer factor f(crossing point).
double eval_k_local(UnitTangent u, UnitTangent v, const KernelConfig& cfg);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long long n = 0;
};

// Monte Carlo mean of eval_H(u, .) over Liouville draws.
MonteCarloEstimate row_mean(UnitTangent u, const KernelConfig& cfg, long long n,
                            RandomStream& rng);

// (1/2) sum_{i,j} H_delta(gamma((i-1) delta), gamma((j-1) delta)); requires
// T to be an integer multiple of delta.
double u_statistic(const GeodesicTrace& trace, const KernelConfig& cfg);

struct SandwichBounds {
  double lower = 0.0, upper = 0.0;
  double n_phi_inner = 0.0;     // N_phi(gamma[0, T]) from the same crossing list
  double n_phi_extended = 0.0;  // N_phi(gamma[-delta, T+delta])
  double n_phi_core = 0.0;      // N_phi(gamma[2 delta, T-2 delta])
};

// Double integrals of (1/2) K_delta over [delta, T-delta]^2 and
// [-delta, T+delta]^2. `extended` must cover gamma[-delta, T+delta] (i.e. a
// trace of length T + 2 delta started delta earlier); h <= delta/4.
// The integrand is a sum of separable mollifier bumps at the trace
// self-crossings, so the double integral reduces to products of exact
// one-dimensional mollifier masses; a uniform grid cannot respect the
// bracketing inequalities (an 8-interval trapezoid of p carries 0.6% excess
// mass), hence the exact evaluation.
SandwichBounds sandwich(const GeodesicTrace& extended, double T, const KernelConfig& cfg,
                        double h);

// f_delta(u) = (1/kappa_phi) \int k_delta(u, v) dnu_L(v), by Monte Carlo.
MonteCarloEstimate f_delta(UnitTangent u, const KernelConfig& cfg, long long n,
                           RandomStream& rng);

namespace detail {
// Signed-time crossings of the two-sided 2 delta segments around u and v,
// enumerated in the universal cover against nearby deck translates.
struct SignedCrossing {
  double s = 0.0, t = 0.0, theta = 0.0;
  DiskPoint location;  // in the chart of u's segment
};
std::vector<SignedCrossing> two_sided_crossings(UnitTangent u, UnitTangent v,
                                                const KernelConfig& cfg);
}  // namespace detail

}  // namespace geoflux
