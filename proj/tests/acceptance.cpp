// Acceptance suite: one pass/fail line per criterion. Usage:
//   acceptance            runs all criteria
//   acceptance 3 7        runs a subset
// Exit status is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "geoflux/experiments.hpp"

using namespace geoflux;

namespace {

constexpr std::uint64_t kSeed = 20260809;

std::shared_ptr<const SurfaceSpec> bolza() { return surface_by_name("bolza"); }

ExperimentConfig base_config(int replicas) {
  ExperimentConfig c;
  c.master_seed = kSeed;
  c.seed_set = true;
  c.replicas = replicas;
  c.t_grid = {100.0, 200.0, 400.0, 800.0};
  c.out_dir = "/tmp/gfx_acceptance";
  return c;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// 1. Quadratic-growth constant of the raw counts against the pinned target.
bool criterion1(std::string* detail) {
  ExperimentConfig c = base_config(64);
  auto records = run_ensemble(c);
  RunningStats n800;
  for (const auto& r : records) n800.add(static_cast<double>(r.n[3]));
  double measured = n800.mean / (800.0 * 800.0);
  double target = 1.0 / (16.0 * kPi * kPi);
  double alt = kappa_phi(SmoothingFn::constant(1.0), *bolza()) / 2.0;
  double ratio = measured / target;
  *detail = "mean N/t^2 = " + fmt(measured) + ", pinned target 1/(16 pi^2) = " + fmt(target) +
            " (ratio " + fmt(ratio) + "); kernel-convention candidate kappa_1/2 = " + fmt(alt) +
            " (ratio " + fmt(measured / alt) + ")";
  return std::fabs(ratio - 1.0) <= 0.10;
}

// 2. Row-sum identity at 5 Liouville points, 1e6 samples each.
bool criterion2(std::string* detail) {
  KernelConfig kc;
  kc.delta = 0.05;
  kc.phi = SmoothingFn::bump(0.3);
  kc.rho = 0.5;
  kc.surface = bolza();
  double target = kc.delta * kc.delta * kappa_phi(kc.phi, *kc.surface);
  std::vector<MonteCarloEstimate> ests;
  for (int i = 0; i < 5; ++i) {
    RandomStream rng(RandomStream::derive(kSeed, 100 + i));
    UnitTangent u = liouville_sample(rng, *kc.surface);
    ests.push_back(row_mean(u, kc, 1000000, rng));
  }
  double worst = 0.0, worst_pair = 0.0;
  for (const auto& e : ests)
    worst = std::max(worst, std::fabs(e.estimate - target) / e.std_error);
  for (std::size_t i = 0; i < ests.size(); ++i)
    for (std::size_t j = i + 1; j < ests.size(); ++j) {
      double se = std::sqrt(ests[i].std_error * ests[i].std_error +
                            ests[j].std_error * ests[j].std_error);
      worst_pair =
          std::max(worst_pair, std::fabs(ests[i].estimate - ests[j].estimate) / se);
    }
  *detail = "target delta^2 kappa_phi = " + fmt(target) + ", worst |z| = " + fmt(worst) +
            ", worst pairwise z = " + fmt(worst_pair);
  return worst < 3.0 && worst_pair < 3.0;
}

// 3. U-statistic representation equals the direct smoothed count.
bool criterion3(std::string* detail) {
  KernelConfig kc;
  kc.delta = 0.25;
  kc.phi = SmoothingFn::bump(0.3);
  kc.rho = 0.5;
  kc.surface = bolza();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    RandomStream rng(RandomStream::derive(kSeed, 200 + i));
    UnitTangent u0 = liouville_sample(rng, *kc.surface);
    GeodesicTrace tr = trace(u0, 50.0, *kc.surface);
    double direct = 0.0;
    for (const Crossing& x : self_intersections(tr).crossings) direct += kc.phi(x.theta);
    worst = std::max(worst, std::fabs(u_statistic(tr, kc) - direct));
  }
  *detail = "worst |u_statistic - direct| over 20 traces = " + fmt(worst);
  return worst < 1e-9;
}

// 4. Sandwich bounds: zero violations, gap shrinking with delta.
bool criterion4(std::string* detail) {
  const double T = 100.0;
  int violations = 0;
  std::vector<double> gaps;
  for (double delta : {0.2, 0.1, 0.05}) {
    KernelConfig kc;
    kc.delta = delta;
    kc.phi = SmoothingFn::bump(0.3);
    kc.rho = 0.5;
    kc.surface = bolza();
    RunningStats gap;
    for (int i = 0; i < 100; ++i) {
      RandomStream rng(RandomStream::derive(kSeed, 300 + i));
      UnitTangent u0 = liouville_sample(rng, *kc.surface);
      UnitTangent back = reduce_tangent(flow(u0, -delta), *kc.surface);
      GeodesicTrace ext = trace(back, T + 2.0 * delta, *kc.surface);
      SandwichBounds sb = sandwich(ext, T, kc, delta / 4.0);
      if (!(sb.lower <= sb.n_phi_inner + 1e-9 && sb.n_phi_inner <= sb.upper + 1e-9))
        ++violations;
      gap.add((sb.upper - sb.lower) / T);
    }
    gaps.push_back(gap.mean);
  }
  bool monotone = gaps[0] > gaps[1] && gaps[1] > gaps[2];
  *detail = "violations = " + std::to_string(violations) + ", mean gap/T = {" + fmt(gaps[0]) +
            ", " + fmt(gaps[1]) + ", " + fmt(gaps[2]) + "} for delta {0.2, 0.1, 0.05}";
  return violations == 0 && monotone;
}

// 5. Fluctuation-scaling exponents over the ensemble grid.
bool criterion5(std::string* detail) {
  ExperimentConfig c = base_config(200);
  auto records = run_ensemble(c);
  std::vector<double> logt;
  for (double t : c.t_grid) logt.push_back(std::log(t));
  std::vector<std::vector<double>> rows_phi, rows_phif;
  for (const auto& r : records) {
    rows_phi.push_back(r.n_phi);
    rows_phif.push_back(r.n_phi_f);
  }
  SlopeCI global = bootstrap_slope(logt, rows_phi, 200, RandomStream::derive(kSeed, 500));
  SlopeCI local = bootstrap_slope(logt, rows_phif, 200, RandomStream::derive(kSeed, 501));
  *detail = "slope_global = " + fmt(global.slope) + " [" + fmt(global.lo) + ", " +
            fmt(global.hi) + "], window [1.6, 2.4]; slope_local = " + fmt(local.slope) + " [" +
            fmt(local.lo) + ", " + fmt(local.hi) + "], window [2.6, 3.4]";
  return global.slope >= 1.6 && global.slope <= 2.4 && local.slope >= 2.6 &&
         local.slope <= 3.4;
}

// 6. Localized CLT at t = 400.
bool criterion6(std::string* detail) {
  ExperimentConfig c = base_config(200);
  auto records = run_ensemble(c);
  Report rep = localized_clt(records, c, 400.0);
  double p = std::stod(rep.value("clt.p_value"));
  double skew = std::stod(rep.value("clt.skewness"));
  *detail = "KS p = " + fmt(p) + " (need > 0.01), skewness = " + fmt(skew) +
            " (need |skew| < 0.5)";
  return p > 0.01 && std::fabs(skew) < 0.5;
}

// 7. Spatial hash equals the naive oracle on 50 traces at T = 200.
bool criterion7(std::string* detail) {
  int mismatches = 0;
  long long total = 0;
  for (int i = 0; i < 50; ++i) {
    RandomStream rng(RandomStream::derive(kSeed, 700 + i));
    UnitTangent u0 = liouville_sample(rng, *bolza());
    GeodesicTrace tr = trace(u0, 200.0, *bolza());
    CrossingSet fast = self_intersections(tr, EnumerationMode::spatial_hash);
    CrossingSet slow = self_intersections(tr, EnumerationMode::naive);
    total += static_cast<long long>(fast.crossings.size());
    if (fast.crossings.size() != slow.crossings.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t k = 0; k < fast.crossings.size(); ++k) {
      const Crossing& a = fast.crossings[k];
      const Crossing& b = slow.crossings[k];
      if (a.s != b.s || a.t != b.t || a.theta != b.theta) {
        ++mismatches;
        break;
      }
    }
  }
  *detail = std::to_string(total) + " crossings compared, mismatching traces = " +
            std::to_string(mismatches);
  return mismatches == 0;
}

// 8. The skew-product counterexample dichotomy, exactly.
bool criterion8(std::string* detail) {
  CounterexampleResult res = remark_counterexample(1000, kSeed);
  *detail = "orbit_average = " + fmt(res.orbit_average) +
            ", product_integral = " + fmt(res.product_integral);
  return res.orbit_average == 1.0 && res.product_integral == 0.0;
}

// 9. Correlation decay of a smooth bump observable.
bool criterion9(std::string* detail) {
  ExperimentConfig c = base_config(2);
  c.mixing_replicas = 10000;
  auto spec = bolza();
  LocalizerFn bump(DiskPoint{Complex(0.35, 0.0)}, 0.6, spec);
  auto obs = [&bump](UnitTangent u) { return bump(u.base); };
  auto lags = correlation_decay(obs, {0.0, 5.0}, c);
  double corr0 = lags[0].corr, corr5 = lags[1].corr;
  *detail = "corr(0) = " + fmt(corr0) + ", corr(5) = " + fmt(corr5) + ", ratio = " +
            fmt(std::fabs(corr5) / corr0);
  return std::fabs(corr5) < 0.2 * corr0;
}

// 10. Invariant property suites, >= 100 random instances each.
bool criterion10(std::string* detail) {
  auto spec = bolza();
  std::string failures;

  {  // flow additivity
    RandomStream rng(RandomStream::derive(kSeed, 1000));
    for (int i = 0; i < 100; ++i) {
      UnitTangent u = liouville_sample(rng, *spec);
      double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
      UnitTangent x = flow(flow(u, a), b), y = flow(u, a + b);
      if (hyperbolic_distance(x.base, y.base) > 1e-9 ||
          std::fabs(wrap_two_pi(x.dir - y.dir + kPi) - kPi) > 1e-9) {
        failures += " flow-additivity";
        break;
      }
    }
  }

  {  // kernel symmetry and isometry invariance
    KernelConfig kc;
    kc.delta = 0.1;
    kc.phi = SmoothingFn::bump(0.3);
    kc.rho = 0.5;
    kc.surface = spec;
    RandomStream rng(RandomStream::derive(kSeed, 1001));
    bool sym_ok = true, inv_ok = true;
    for (int i = 0; i < 100; ++i) {
      UnitTangent u = liouville_sample(rng, *spec);
      UnitTangent v = flow(UnitTangent{flow(u, rng.uniform(-0.15, 0.15)).base,
                                       rng.uniform(0.0, 2.0 * kPi)},
                           rng.uniform(-0.1, 0.1));
      if (eval_H(u, v, kc) != eval_H(v, u, kc)) sym_ok = false;
      if (eval_K(u, v, kc) != eval_K(v, u, kc)) sym_ok = false;
      const MobiusMap& g = spec->generators[i % 8];
      if (std::fabs(eval_K(apply_isometry(g, u), apply_isometry(g, v), kc) -
                    eval_K(u, v, kc)) > 1e-9)
        inv_ok = false;
    }
    if (!sym_ok) failures += " kernel-symmetry";
    if (!inv_ok) failures += " kernel-isometry-invariance";
  }

  {  // unit speed along traces
    RandomStream rng(RandomStream::derive(kSeed, 1002));
    bool ok = true;
    for (int i = 0; i < 100; ++i) {
      UnitTangent u0 = liouville_sample(rng, *spec);
      GeodesicTrace tr = trace(u0, 20.0, *spec);
      const Arc& a = tr.arcs[static_cast<std::size_t>(rng.uniform() * tr.arcs.size())];
      double len = a.t_end - a.t_begin;
      if (len < 0.02) continue;
      double s = a.t_begin + rng.uniform(0.0, 0.5 * len);
      double h = rng.uniform(0.1, 0.5) * (a.t_end - s);
      double d = hyperbolic_distance(tangent_at(tr, s).base, tangent_at(tr, s + h).base);
      if (std::fabs(d - h) > 1e-8) ok = false;
    }
    if (!ok) failures += " unit-speed";
  }

  {  // time reversal and restriction of crossing sets; angle range
    RandomStream rng(RandomStream::derive(kSeed, 1003));
    bool rev_ok = true, res_ok = true, range_ok = true;
    int compared = 0;
    for (int i = 0; i < 30 && compared < 100; ++i) {
      const double T = 15.0;  // e^T rounding growth must stay under the 1e-7 window
      UnitTangent u0 = liouville_sample(rng, *spec);
      GeodesicTrace fwd = trace(u0, T, *spec);
      CrossingSet cf = self_intersections(fwd);
      UnitTangent end = tangent_at(fwd, T);
      GeodesicTrace rev = trace(make_unit_tangent(end.base, end.dir + kPi), T, *spec);
      CrossingSet cr = self_intersections(rev);
      if (cf.crossings.size() != cr.crossings.size()) {
        rev_ok = false;
        continue;
      }
      std::vector<Crossing> mapped;
      for (const Crossing& x : cr.crossings)
        mapped.push_back(Crossing{T - x.t, T - x.s, x.theta, x.location});
      std::sort(mapped.begin(), mapped.end(), [](const Crossing& a, const Crossing& b) {
        return a.s < b.s || (a.s == b.s && a.t < b.t);
      });
      for (std::size_t k = 0; k < cf.crossings.size(); ++k) {
        ++compared;
        if (std::fabs(mapped[k].s - cf.crossings[k].s) > 1e-7 ||
            std::fabs(mapped[k].t - cf.crossings[k].t) > 1e-7 ||
            std::fabs(mapped[k].theta - cf.crossings[k].theta) > 1e-7)
          rev_ok = false;
        if (!(cf.crossings[k].theta > 0.0 && cf.crossings[k].theta < kPi)) range_ok = false;
      }
      // restriction
      GeodesicTrace half = trace(u0, T / 2.0, *spec);
      CrossingSet ch = self_intersections(half);
      std::vector<const Crossing*> limited;
      for (const Crossing& x : cf.crossings)
        if (x.t <= T / 2.0) limited.push_back(&x);
      if (limited.size() != ch.crossings.size()) {
        res_ok = false;
      } else {
        for (std::size_t k = 0; k < limited.size(); ++k)
          if (std::fabs(limited[k]->s - ch.crossings[k].s) > 1e-9 ||
              std::fabs(limited[k]->t - ch.crossings[k].t) > 1e-9)
            res_ok = false;
      }
    }
    if (compared < 100) failures += " too-few-crossings";
    if (!rev_ok) failures += " time-reversal";
    if (!res_ok) failures += " restriction";
    if (!range_ok) failures += " angle-range";
  }

  *detail = failures.empty() ? "flow additivity, kernel symmetry/invariance, unit speed, "
                               "time reversal, restriction, angle range all hold"
                             : "failed:" + failures;
  return failures.empty();
}

struct Criterion {
  int id;
  const char* title;
  std::function<bool(std::string*)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "law-of-large-numbers constant for raw counts", criterion1},
      {2, "row-sum identity of the intersection kernel", criterion2},
      {3, "u-statistic equals direct smoothed counts", criterion3},
      {4, "sandwich bounds bracket the count, gap shrinks with delta", criterion4},
      {5, "fluctuation-scaling exponents (global/local)", criterion5},
      {6, "localized central limit theorem at t = 400", criterion6},
      {7, "spatial hash matches the naive enumeration", criterion7},
      {8, "skew-product counterexample dichotomy", criterion8},
      {9, "correlation decay of a bump observable", criterion9},
      {10, "invariant property suites", criterion10},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(&detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", c.id, c.title,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
