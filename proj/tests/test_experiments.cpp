#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "geoflux/experiments.hpp"

using namespace geoflux;

namespace {

ExperimentConfig tiny_config(const char* out) {
  ExperimentConfig c;
  c.master_seed = 424242;
  c.seed_set = true;
  c.replicas = 4;
  c.t_grid = {20.0, 50.0};
  c.out_dir = out;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE_BEGIN("experiments");

TEST_CASE("config validation") {
  ExperimentConfig c = tiny_config("/tmp/gfx_cfg");
  CHECK_NOTHROW(validate(c));
  c.replicas = 1;
  CHECK_THROWS_AS(validate(c), Error);
  c = tiny_config("/tmp/gfx_cfg");
  c.t_grid = {50.0, 50.0};
  CHECK_THROWS_AS(validate(c), Error);
  c = tiny_config("/tmp/gfx_cfg");
  c.delta = 0.4;  // > rho/2
  CHECK_THROWS_AS(validate(c), Error);
  c = tiny_config("/tmp/gfx_cfg");
  CHECK_THROWS_AS(apply_config_line(&c, "bogus_key", "1"), Error);
  CHECK_THROWS_AS(apply_config_line(&c, "replicas", "abc"), Error);
  apply_config_line(&c, "t_grid", "10,20,30");
  CHECK(c.t_grid == std::vector<double>{10.0, 20.0, 30.0});
  apply_config_line(&c, "f_center", "0.1,-0.2");
  CHECK(c.f_center == Complex(0.1, -0.2));
}

TEST_CASE("config file loading") {
  const char* path = "/tmp/gfx_test_config.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n"
        << "replicas = 6\n"
        << "t_grid=25,60\n"
        << "seed = 99\n";
  }
  ExperimentConfig c;
  load_config_file(&c, path);
  CHECK(c.replicas == 6);
  CHECK(c.t_grid == std::vector<double>{25.0, 60.0});
  CHECK(c.master_seed == 99);
  CHECK(c.seed_set);
  CHECK_THROWS_AS(load_config_file(&c, "/tmp/does_not_exist_gfx.txt"), Error);
}

TEST_CASE("run_ensemble is deterministic and monotone") {
  ExperimentConfig c = tiny_config("/tmp/gfx_ens");
  auto a = run_ensemble(c);
  auto b = run_ensemble(c);
  REQUIRE(a.size() == b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a[r].seed == b[r].seed);
    CHECK(a[r].u0.base.z == b[r].u0.base.z);
    CHECK(a[r].u0.dir == b[r].u0.dir);
    REQUIRE(a[r].n.size() == 2);
    CHECK(a[r].n == b[r].n);
    CHECK(a[r].n_phi == b[r].n_phi);
    CHECK(a[r].n_phi_f == b[r].n_phi_f);
    CHECK(a[r].n[0] <= a[r].n[1]);
  }

  ExperimentConfig serial = c;
  serial.threads = 1;
  auto s = run_ensemble(serial);
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a[r].n == s[r].n);
    CHECK(a[r].n_phi == s[r].n_phi);
  }
}

TEST_CASE("restriction reuse: counts match a fresh shorter trace") {
  ExperimentConfig c = tiny_config("/tmp/gfx_restrict");
  auto records = run_ensemble(c);
  auto spec = surface_by_name(c.surface_name);
  SmoothingFn phi = SmoothingFn::bump(c.alpha);
  for (const auto& rec : records) {
    GeodesicTrace fresh = trace(rec.u0, c.t_grid[0], *spec);
    CrossingSet set = self_intersections(fresh);
    long long n = static_cast<long long>(set.crossings.size());
    double n_phi = 0.0;
    for (const Crossing& x : set.crossings) n_phi += phi(x.theta);
    CHECK(n == rec.n[0]);
    CHECK(std::fabs(n_phi - rec.n_phi[0]) < 1e-9);
  }
}

TEST_CASE("tiny smoke run produces empty crossing sets cleanly") {
  ExperimentConfig c = tiny_config("/tmp/gfx_smoke");
  c.replicas = 2;
  c.t_grid = {1.0, 2.0};
  auto records = run_ensemble(c);
  REQUIRE(records.size() == 2);
  CHECK(records[0].n[0] == 0);
  CHECK(records[0].n_phi[0] == 0.0);
}

TEST_CASE("slln report candidates and localized constants") {
  ExperimentConfig c = tiny_config("/tmp/gfx_slln");
  c.replicas = 16;
  c.t_grid = {100.0, 200.0};
  auto records = run_ensemble(c);
  Report rep = slln_report(records, c);
  CHECK(!rep.value("slln.kappa_phi").empty());
  CHECK(!rep.value("slln.measured_N_constant").empty());
  double ratio_lln = std::stod(rep.value("slln.ratio_to_kappaM_half"));
  double ratio_kernel = std::stod(rep.value("slln.ratio_to_kappaPhiOne_half"));
  // The measured raw-count constant follows the kernel normalization; the
  // factor-4 mismatch with the other candidate is reported, not resolved.
  CHECK(std::fabs(ratio_kernel - 1.0) < 0.15);
  CHECK(std::fabs(ratio_lln - 4.0) < 0.6);
  std::string text = rep.text();
  CHECK(text.find("overall=") != std::string::npos);
}

TEST_CASE("slln report: vanishing localizer support gives zero counts") {
  ExperimentConfig c = tiny_config("/tmp/gfx_zero_f");
  c.f_radius = 1e-6;
  auto records = run_ensemble(c);
  for (const auto& rec : records)
    for (double v : rec.n_phi_f) CHECK(v == 0.0);
  Report rep = slln_report(records, c);
  CHECK(std::stod(rep.value("slln.A_phi_f")) == 0.0);
}

TEST_CASE("scaling exponents on synthetic ensembles") {
  // iid partial sums: variance grows linearly, slope 1.
  ExperimentConfig c = tiny_config("/tmp/gfx_scaling");
  c.t_grid = {100.0, 200.0, 400.0, 800.0};
  RandomStream rng(71);
  std::vector<ReplicaRecord> synthetic(150);
  for (std::size_t r = 0; r < synthetic.size(); ++r) {
    ReplicaRecord rec;
    rec.replica = static_cast<int>(r);
    rec.t = c.t_grid;
    double sum = 0.0;
    std::size_t j = 0;
    for (int i = 1; i <= 800; ++i) {
      sum += rng.normal();
      if (j < c.t_grid.size() && i == static_cast<int>(c.t_grid[j])) {
        rec.n.push_back(i);
        rec.n_phi.push_back(sum);
        rec.n_phi_f.push_back(sum);
        ++j;
      }
    }
    synthetic[r] = rec;
  }
  Report rep = scaling_exponents(synthetic, c);
  double slope = std::stod(rep.value("scaling.slope_global"));
  CHECK(std::fabs(slope - 1.0) < 0.1);

  // Zero variance at a grid point is degenerate data.
  std::vector<ReplicaRecord> constant(
      120, ReplicaRecord{0, 0, UnitTangent{}, c.t_grid, {1, 1, 1, 1},
                         {1.0, 1.0, 1.0, 1.0}, {1.0, 1.0, 1.0, 1.0}, 0.0, 0});
  CHECK_THROWS_AS((void)scaling_exponents(constant, c), Error);
  // Undersized ensembles violate the precondition.
  CHECK_THROWS_AS((void)scaling_exponents({synthetic[0], synthetic[1]}, c), Error);
}

TEST_CASE("localized clt preconditions") {
  ExperimentConfig c = tiny_config("/tmp/gfx_clt");
  auto records = run_ensemble(c);
  CHECK_THROWS_AS((void)localized_clt(records, c, 33.0), Error);  // too few replicas
  // With enough synthetic replicas, an off-grid time is still rejected.
  std::vector<ReplicaRecord> many(220, records[0]);
  RandomStream rng(81);
  for (auto& r : many)
    for (double& v : r.n_phi_f) v += rng.normal();
  CHECK_THROWS_AS((void)localized_clt(many, c, 33.0), Error);
  CHECK_NOTHROW((void)localized_clt(many, c, 20.0));
}

TEST_CASE("correlation decay controls") {
  ExperimentConfig c = tiny_config("/tmp/gfx_corr");
  c.mixing_replicas = 2000;
  auto constant = [](UnitTangent) { return 5.0; };
  auto lags = correlation_decay(constant, {0.0, 1.0, 3.0}, c);
  for (const LagCorrelation& lc : lags) CHECK(lc.corr == 0.0);

  auto spec = surface_by_name(c.surface_name);
  LocalizerFn bump(DiskPoint{{0.35, 0.0}}, 0.6, spec);
  auto obs = [&bump](UnitTangent u) { return bump(u.base); };
  auto decay = correlation_decay(obs, {0.0, 5.0}, c);
  REQUIRE(decay.size() == 2);
  CHECK(decay[0].corr > 0.0);
  CHECK(std::fabs(decay[1].corr) < 0.2 * decay[0].corr);
  for (const LagCorrelation& lc : decay)
    CHECK(std::fabs(lc.shuffled) < 3.0 * lc.shuffled_se + 1e-12);
}

TEST_CASE("double average check trends") {
  ExperimentConfig c = tiny_config("/tmp/gfx_davg");
  c.t_grid = {200.0, 400.0, 800.0};
  auto prod = double_average_check(DoubleAverageKernel::product_observable, c);
  REQUIRE(prod.size() == 3);
  for (const auto& r : prod) CHECK(r.target == 0.0);
  CHECK(prod.back().gap < prod.front().gap);

  ExperimentConfig ck = c;
  ck.t_grid = {100.0, 200.0};
  auto kern = double_average_check(DoubleAverageKernel::smoothed_intersection, ck);
  REQUIRE(kern.size() == 2);
  auto spec = surface_by_name(c.surface_name);
  double kp = kappa_phi(SmoothingFn::bump(c.alpha), *spec);
  for (const auto& r : kern) {
    CHECK(std::fabs(r.target - kp) < 0.15 * kp);  // Monte Carlo target near quadrature value
    CHECK(r.empirical > 0.0);
  }
}

TEST_CASE("remark counterexample is exact") {
  CounterexampleResult res = remark_counterexample(1000, 313);
  CHECK(res.orbit_average == 1.0);
  CHECK(res.product_integral == 0.0);
  CHECK(std::fabs(res.continuous_control) < 0.05);
  CounterexampleResult one = remark_counterexample(1, 313);
  CHECK(one.orbit_average == 1.0);
  CHECK_THROWS_AS((void)remark_counterexample(0, 1), Error);
}

TEST_CASE("localizer mean against a radial oracle") {
  auto spec = surface_by_name("bolza");
  LocalizerFn f(DiskPoint{}, 0.2, spec);
  double grid = localizer_mean(f, *spec);
  // Radial Simpson oracle: (1/|M|) int_0^r f(s) 2 pi sinh(s) ds.
  const int n = 2000;
  double h = 0.2 / n, total = 0.0;
  for (int i = 0; i <= n; ++i) {
    double s = i * h;
    double q = s / 0.2;
    double val = q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q * q)) : 0.0;
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    total += w * val * 2.0 * kPi * std::sinh(s);
  }
  total *= h / 3.0;
  double oracle = total / spec->area;
  CHECK(grid == doctest::Approx(oracle).epsilon(2e-3));
}

TEST_CASE("subcommand drivers write artifacts") {
  const std::string dir = "/tmp/gfx_driver_out";
  std::filesystem::remove_all(dir);
  ExperimentConfig c = tiny_config(dir.c_str());
  c.replicas = 2;
  c.t_grid = {20.0, 50.0};
  Report rep = run_subcommand("slln", c);
  CHECK(std::filesystem::exists(dir + "/records.csv"));
  CHECK(std::filesystem::exists(dir + "/summary.csv"));
  CHECK(std::filesystem::exists(dir + "/report.txt"));
  std::string records = slurp(dir + "/records.csv");
  CHECK(records.rfind("replica,seed,t,N,N_phi,N_phi_f,wall_ms\n", 0) == 0);
  std::string summary = slurp(dir + "/summary.csv");
  CHECK(summary.rfind("t,mean_N,var_N,mean_Nphi,var_Nphi,mean_Nphif,var_Nphif,se_N,se_Nphi,se_Nphif\n",
                      0) == 0);
  // Small runs skip the threshold checks rather than failing them.
  CHECK(rep.passed());

  CHECK_THROWS_AS((void)run_subcommand("nonsense", c), Error);

  Report cx = run_subcommand("counterexample", c);
  CHECK(cx.value("counterexample.orbit_average") == "1");
  CHECK(cx.passed());

  Report td = run_subcommand("trace-dump", c);
  CHECK(std::filesystem::exists(dir + "/trace.csv"));
  CHECK(std::filesystem::exists(dir + "/crossings.csv"));
  CHECK(td.passed());
}

TEST_SUITE_END();
