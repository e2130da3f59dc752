#include "geoflux/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geoflux/errors.hpp"

namespace geoflux {

double RunningStats::std_error() const {
  return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

RunningStats RunningStats::merge(const RunningStats& a, const RunningStats& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  RunningStats out;
  out.count = a.count + b.count;
  double d = b.mean - a.mean;
  out.mean = a.mean + d * static_cast<double>(b.count) / static_cast<double>(out.count);
  out.m2 = a.m2 + b.m2 +
           d * d * static_cast<double>(a.count) * static_cast<double>(b.count) /
               static_cast<double>(out.count);
  return out;
}

double sample_mean(const std::vector<double>& xs) {
  if (xs.empty()) fail(Errc::degenerate_data, "sample_mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) fail(Errc::degenerate_data, "sample_variance: need >= 2 points");
  double m = sample_mean(xs), s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

namespace {

double central_moment(const std::vector<double>& xs, int k) {
  double m = sample_mean(xs), s = 0.0;
  for (double x : xs) s += std::pow(x - m, k);
  return s / static_cast<double>(xs.size());
}

}  // namespace

double sample_skewness(const std::vector<double>& xs) {
  double m2 = central_moment(xs, 2);
  if (m2 <= 0.0) fail(Errc::degenerate_data, "sample_skewness: zero variance");
  return central_moment(xs, 3) / std::pow(m2, 1.5);
}

double sample_excess_kurtosis(const std::vector<double>& xs) {
  double m2 = central_moment(xs, 2);
  if (m2 <= 0.0) fail(Errc::degenerate_data, "sample_excess_kurtosis: zero variance");
  return central_moment(xs, 4) / (m2 * m2) - 3.0;
}

LineFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(Errc::invalid_argument, "ols_fit: need matching samples of size >= 2");
  double mx = sample_mean(x), my = sample_mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) fail(Errc::degenerate_data, "ols_fit: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.residual_rms = std::sqrt(ss_res / static_cast<double>(x.size()));
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic_fitted_normal(std::vector<double> xs) {
  if (xs.size() < 3) fail(Errc::degenerate_data, "ks_statistic: need >= 3 points");
  double m = sample_mean(xs);
  double sd = std::sqrt(sample_variance(xs));
  if (sd <= 0.0) fail(Errc::degenerate_data, "ks_statistic: zero standard deviation");
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double c = normal_cdf((xs[i] - m) / sd);
    double hi = (static_cast<double>(i) + 1.0) / n - c;
    double lo = c - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

double lilliefors_p_value(const std::vector<double>& xs, int sims, std::uint64_t seed) {
  double observed = ks_statistic_fitted_normal(xs);
  RandomStream rng(seed);
  int geq = 0;
  std::vector<double> sample(xs.size());
  for (int s = 0; s < sims; ++s) {
    for (double& v : sample) v = rng.normal();
    if (ks_statistic_fitted_normal(sample) >= observed) ++geq;
  }
  return (1.0 + static_cast<double>(geq)) / (1.0 + static_cast<double>(sims));
}

namespace {

double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) fail(Errc::invalid_argument, "gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_p_value(double stat, int dof) {
  if (dof <= 0) fail(Errc::invalid_argument, "chi_square_p_value: dof must be positive");
  return gamma_q(0.5 * dof, 0.5 * stat);
}

ChiSquareResult chi_square_test(const std::vector<double>& observed,
                                const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.size() < 2)
    fail(Errc::invalid_argument, "chi_square_test: need matching bins >= 2");
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) fail(Errc::invalid_argument, "chi_square_test: nonpositive expectation");
    double d = observed[i] - expected[i];
    r.stat += d * d / expected[i];
  }
  r.dof = static_cast<int>(observed.size()) - 1;
  r.p_value = chi_square_p_value(r.stat, r.dof);
  return r;
}

std::vector<double> gqf_sample(const std::vector<double>& thetas, long long n, RandomStream& rng) {
  if (thetas.empty()) fail(Errc::invalid_argument, "gqf_sample: empty coefficient list");
  std::vector<double> out;
  out.reserve(n);
  for (long long i = 0; i < n; ++i) {
    double s = 0.0;
    for (double th : thetas) {
      double z = rng.normal();
      s += th * z * z;
    }
    out.push_back(s);
  }
  return out;
}

GqfFit gqf_moment_fit(double variance, double third_central) {
  // With u = t1 + t2, v = t1 t2: t1^2+t2^2 = u^2 - 2v, t1^3+t2^3 = u^3 - 3uv.
  // Substituting v from the variance equation gives 4u^3 - 6 var u + m3 = 0,
  // a depressed cubic u^3 + p u + q with p = -(3/2) var, q = m3/4.
  GqfFit fit;
  if (variance <= 0.0) return fit;
  const double p = -1.5 * variance;
  const double q = third_central / 4.0;

  std::vector<double> roots;
  double disc = -4.0 * p * p * p - 27.0 * q * q;
  if (disc >= 0.0) {
    double r = 2.0 * std::sqrt(-p / 3.0);
    double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k)
      roots.push_back(r * std::cos(phi / 3.0 - 2.0 * std::numbers::pi * k / 3.0));
  } else {
    double s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    roots.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s));
  }

  double best_err = 1e300;
  for (double u : roots) {
    double pair_disc = variance - u * u;  // u^2 - 4v with v from the variance
    if (pair_disc < -1e-9 * variance) continue;
    pair_disc = std::max(pair_disc, 0.0);
    double t1 = 0.5 * (u + std::sqrt(pair_disc));
    double t2 = 0.5 * (u - std::sqrt(pair_disc));
    double err = std::fabs(2.0 * (t1 * t1 + t2 * t2) - variance) +
                 std::fabs(8.0 * (t1 * t1 * t1 + t2 * t2 * t2) - third_central);
    if (err < best_err) {
      best_err = err;
      fit = GqfFit{t1, t2, true};
    }
  }
  return fit;
}

SlopeCI bootstrap_slope(const std::vector<double>& x, const std::vector<std::vector<double>>& ys,
                        int resamples, std::uint64_t seed) {
  std::size_t n_rep = ys.size();
  std::size_t n_t = x.size();
  if (n_rep < 2) fail(Errc::degenerate_data, "bootstrap_slope: need >= 2 replicas");
  for (const auto& row : ys)
    if (row.size() != n_t) fail(Errc::invalid_argument, "bootstrap_slope: ragged rows");

  auto slope_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<double> logvar(n_t);
    for (std::size_t j = 0; j < n_t; ++j) {
      RunningStats rs;
      for (std::size_t r : idx) rs.add(ys[r][j]);
      double v = rs.variance();
      if (v <= 0.0) fail(Errc::degenerate_data, "bootstrap_slope: zero variance at a grid point");
      logvar[j] = std::log(v);
    }
    return ols_fit(x, logvar).slope;
  };

  std::vector<std::size_t> all(n_rep);
  for (std::size_t i = 0; i < n_rep; ++i) all[i] = i;
  SlopeCI out;
  out.slope = slope_of(all);

  RandomStream rng(seed);
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<std::size_t> idx(n_rep);
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n_rep; ++i)
      idx[i] = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_rep));
    try {
      slopes.push_back(slope_of(idx));
    } catch (const Error&) {
      // Degenerate resample (all-equal column); skip it.
    }
  }
  if (slopes.size() < 8) fail(Errc::degenerate_data, "bootstrap_slope: too few valid resamples");
  std::sort(slopes.begin(), slopes.end());
  auto pick = [&](double q) {
    double pos = q * static_cast<double>(slopes.size() - 1);
    return slopes[static_cast<std::size_t>(std::llround(pos))];
  };
  out.lo = pick(0.025);
  out.hi = pick(0.975);
  return out;
}

}  // namespace geoflux
