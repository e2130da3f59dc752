#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "geoflux/random.hpp"

namespace geoflux {

// Streaming mean/variance accumulator with exact batch merging.
struct RunningStats {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double std_error() const;
  static RunningStats merge(const RunningStats& a, const RunningStats& b);
};

double sample_mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // unbiased
double sample_skewness(const std::vector<double>& xs);
double sample_excess_kurtosis(const std::vector<double>& xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  double r2 = 0.0;
};

LineFit ols_fit(const std::vector<double>& x, const std::vector<double>& y);

// Two-sided KS distance between the sample and the standard normal CDF after
// standardizing by the sample mean/sd.
double ks_statistic_fitted_normal(std::vector<double> xs);

// Lilliefors-style p-value: the null distribution of the fitted-normal KS
// statistic is simulated with `sims` normal samples of matching size.
double lilliefors_p_value(const std::vector<double>& xs, int sims, std::uint64_t seed);

double normal_cdf(double x);

// Regularized incomplete gamma Q(a, x) and the chi-square upper tail.
double gamma_q(double a, double x);
double chi_square_p_value(double stat, int dof);

struct ChiSquareResult {
  double stat = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

// Goodness of fit of observed counts against expected counts (same total).
ChiSquareResult chi_square_test(const std::vector<double>& observed,
                                const std::vector<double>& expected);

// Samples of sum_j theta_j Z_j^2 with independent unit Gaussians Z_j.
std::vector<double> gqf_sample(const std::vector<double>& thetas, long long n, RandomStream& rng);

// Moment match of a two-term Gaussian quadratic form to (variance, third
// central moment): 2(t1^2+t2^2) = var, 8(t1^3+t2^3) = m3.
struct GqfFit {
  double theta1 = 0.0, theta2 = 0.0;
  bool ok = false;
};
GqfFit gqf_moment_fit(double variance, double third_central);

// Percentile bootstrap confidence interval for the OLS slope of y on x,
// resampling whole rows of `ys` (replicas) with replacement.
struct SlopeCI {
  double slope = 0.0;
  double lo = 0.0, hi = 0.0;
};
SlopeCI bootstrap_slope(const std::vector<double>& x, const std::vector<std::vector<double>>& ys,
                        int resamples, std::uint64_t seed);

}  // namespace geoflux
