#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geoflux/kernels.hpp"
#include "geoflux/stats.hpp"

namespace geoflux {

struct ExperimentConfig {
  std::string surface_name = "bolza";
  std::vector<double> t_grid = {100.0, 200.0, 400.0, 800.0};
  int replicas = 64;
  double delta = 0.1;
  double alpha = 0.3;
  double rho = 0.5;
  Complex f_center{0.0, 0.0};
  double f_radius = 0.2;
  std::uint64_t master_seed = 0;
  bool seed_set = false;
  std::string out_dir = "geoflux_out";
  int threads = 0;  // 0 = machine parallelism

  // Sub-command specific knobs.
  long long mc_samples = 1000000;                    // kernel-check sample count
  long long n_steps = 1000;                          // counterexample orbit length
  double t_star = 400.0;                             // clt / fluctuation time
  std::vector<double> lags = {0.0, 1.0, 2.0, 3.0, 5.0};
  int mixing_replicas = 10000;
  double sandwich_T = 100.0;
  int sandwich_traces = 100;
  std::vector<double> sandwich_deltas = {0.2, 0.1, 0.05};
  double trace_T = 200.0;  // trace-dump length
};

void validate(const ExperimentConfig& config);

struct ReplicaRecord {
  int replica = 0;
  std::uint64_t seed = 0;
  UnitTangent u0;
  std::vector<double> t;
  std::vector<long long> n;
  std::vector<double> n_phi;
  std::vector<double> n_phi_f;
  double wall_ms = 0.0;
  int vertex_retries = 0;
};

// One Liouville start per replica, traced once at max(t_grid); counts at the
// other grid times by restriction.
std::vector<ReplicaRecord> run_ensemble(const ExperimentConfig& config);

struct Check {
  std::string name;
  bool ran = false;
  bool passed = false;
  std::string detail;
};

class Report {
 public:
  void put(const std::string& key, const std::string& value);
  void put(const std::string& key, double value);
  void put(const std::string& key, long long value);
  void check(const std::string& name, bool passed, const std::string& detail);
  void skip(const std::string& name, const std::string& why);
  void absorb(const Report& other);
  bool passed() const;
  std::string text() const;
  const std::vector<Check>& checks() const { return checks_; }
  std::string value(const std::string& key) const;

 private:
  std::vector<std::pair<std::string, std::string>> kv_;
  std::vector<Check> checks_;
};

Report slln_report(const std::vector<ReplicaRecord>& records, const ExperimentConfig& config);
Report scaling_exponents(const std::vector<ReplicaRecord>& records,
                         const ExperimentConfig& config);
Report localized_clt(const std::vector<ReplicaRecord>& records, const ExperimentConfig& config,
                     double t_star);
Report global_fluctuation_report(const std::vector<ReplicaRecord>& records,
                                 const ExperimentConfig& config, double t_star);

struct LagCorrelation {
  double lag = 0.0;
  double corr = 0.0;
  double std_error = 0.0;
  double shuffled = 0.0;
  double shuffled_se = 0.0;
};

std::vector<LagCorrelation> correlation_decay(const std::function<double(UnitTangent)>& observable,
                                              const std::vector<double>& lags,
                                              const ExperimentConfig& config);

enum class DoubleAverageKernel { product_observable, smoothed_intersection };

struct DoubleAverageResult {
  double t = 0.0;
  double empirical = 0.0;
  double target = 0.0;
  double gap = 0.0;
};

std::vector<DoubleAverageResult> double_average_check(DoubleAverageKernel kind,
                                                      const ExperimentConfig& config);

struct CounterexampleResult {
  double orbit_average = 0.0;
  double product_integral = 0.0;
  double continuous_control = 0.0;  // orbit average of g (x) g for g = cos(2 pi x)
};

CounterexampleResult remark_counterexample(long long n_steps, std::uint64_t seed);

// Normalized-area integral of the localizer over the polygon (midpoint grid).
double localizer_mean(const LocalizerFn& f, const SurfaceSpec& spec);

// Run one CLI sub-command: computes, writes records/summary/report artifacts
// under config.out_dir, and returns the report.
Report run_subcommand(const std::string& name, const ExperimentConfig& config);

std::vector<std::string> subcommand_names();

// key=value config file support; unknown keys are rejected.
void apply_config_line(ExperimentConfig* config, const std::string& key,
                       const std::string& value);
void load_config_file(ExperimentConfig* config, const std::string& path);

}  // namespace geoflux
