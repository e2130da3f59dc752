// geoflux command-line front end. Talks to the core exclusively through the
// C API in geoflux.h.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geoflux.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitThreshold = 2;

struct ConfigGuard {
  gfx_config* cfg = nullptr;
  ~ConfigGuard() { gfx_config_destroy(cfg); }
};

struct ReportGuard {
  gfx_report* rep = nullptr;
  ~ReportGuard() { gfx_report_destroy(rep); }
};

int fail_usage(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> subcommands = {"slln",     "scaling",        "clt",
                                                "kernel-check", "sandwich",   "mixing",
                                                "counterexample", "trace-dump"};

  CLI::App app{"geoflux: self-intersection statistics of random geodesics on "
               "compact hyperbolic surfaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gfx_version());

  const std::pair<const char*, const char*> sub_help[] = {
      {"slln", "law-of-large-numbers constants for N, N_phi, N_phi_f"},
      {"scaling", "variance-scaling exponents with bootstrap CIs"},
      {"clt", "localized normality test and fluctuation moments"},
      {"kernel-check", "kernel row sums against delta^2 kappa_phi"},
      {"sandwich", "integral bracketing of smoothed counts"},
      {"mixing", "correlation decay and double ergodic averages"},
      {"counterexample", "skew-product orbit/product dichotomy"},
      {"trace-dump", "arc and crossing tables for one trace"},
  };

  std::string config_path;
  std::string seed, surface, t_grid, replicas, delta, alpha, rho, f_center, f_radius, out_dir,
      threads, mc_samples, n_steps, t_star, lags, mixing_replicas, sandwich_T, sandwich_traces,
      sandwich_deltas, trace_T;

  std::vector<CLI::App*> subs;
  for (const std::string& name : subcommands) {
    const char* help = "";
    for (const auto& [n, h] : sub_help)
      if (name == n) help = h;
    subs.push_back(app.add_subcommand(name, help));
  }

  auto add_all = [&](const char* flag, std::string& target, const char* help) {
    for (CLI::App* sub : subs) sub->add_option(flag, target, help);
  };
  for (CLI::App* sub : subs)
    sub->add_option("--config", config_path, "key=value config file; flags override");
  add_all("--seed", seed, "master seed (required)");
  add_all("--surface", surface, "surface name (bolza)");
  add_all("--t-grid", t_grid, "comma list of segment lengths");
  add_all("--replicas", replicas, "ensemble size (>= 2)");
  add_all("--delta", delta, "kernel window delta");
  add_all("--alpha", alpha, "smoothing cutoff alpha");
  add_all("--rho", rho, "transversality scale rho");
  add_all("--f-center", f_center, "localizer center re,im");
  add_all("--f-radius", f_radius, "localizer radius");
  add_all("--out", out_dir, "output directory");
  add_all("--threads", threads, "worker cap (default GEOFLUX_THREADS or machine)");
  add_all("--samples", mc_samples, "Monte Carlo samples (kernel-check)");
  add_all("--n-steps", n_steps, "orbit length (counterexample)");
  add_all("--t-star", t_star, "target time for clt/fluctuations");
  add_all("--lags", lags, "comma list of correlation lags");
  add_all("--mixing-replicas", mixing_replicas, "replicas for correlation decay");
  add_all("--sandwich-T", sandwich_T, "segment length for sandwich runs");
  add_all("--sandwich-traces", sandwich_traces, "trace count for sandwich runs");
  add_all("--sandwich-deltas", sandwich_deltas, "comma list of sandwich deltas");
  add_all("--trace-T", trace_T, "length for trace-dump");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {  // --help / --version
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::fprintf(stderr, "error: %s\nvalid subcommands:", msg.c_str());
    for (const std::string& s : subcommands) std::fprintf(stderr, " %s", s.c_str());
    std::fprintf(stderr, "\n");
    return kExitRuntime;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string sub_name = active->get_name();

  ConfigGuard cfg;
  if (gfx_config_create(&cfg.cfg) != GFX_OK) return fail_usage(gfx_last_error());

  if (!config_path.empty()) {
    if (gfx_config_load_file(cfg.cfg, config_path.c_str()) != GFX_OK)
      return fail_usage(std::string("--config: ") + gfx_last_error());
  }

  // Environment cap applies unless --threads was given explicitly.
  if (threads.empty()) {
    if (const char* env = std::getenv("GEOFLUX_THREADS")) threads = env;
  }

  const std::pair<const char*, std::string*> flag_keys[] = {
      {"seed", &seed},           {"surface", &surface},
      {"t_grid", &t_grid},       {"replicas", &replicas},
      {"delta", &delta},         {"alpha", &alpha},
      {"rho", &rho},             {"f_center", &f_center},
      {"f_radius", &f_radius},   {"out", &out_dir},
      {"threads", &threads},     {"mc_samples", &mc_samples},
      {"n_steps", &n_steps},     {"t_star", &t_star},
      {"lags", &lags},           {"mixing_replicas", &mixing_replicas},
      {"sandwich_T", &sandwich_T}, {"sandwich_traces", &sandwich_traces},
      {"sandwich_deltas", &sandwich_deltas}, {"trace_T", &trace_T},
  };
  for (const auto& [key, value] : flag_keys) {
    if (value->empty()) continue;
    if (gfx_config_set(cfg.cfg, key, value->c_str()) != GFX_OK)
      return fail_usage(std::string("--") + key + ": " + gfx_last_error());
  }

  if (gfx_config_validate(cfg.cfg) != GFX_OK) return fail_usage(gfx_last_error());

  ReportGuard report;
  gfx_status st = gfx_run(cfg.cfg, sub_name.c_str(), &report.rep);
  if (st != GFX_OK) {
    std::fprintf(stderr, "error: %s\n", gfx_last_error());
    return kExitRuntime;
  }
  std::fputs(gfx_report_text(report.rep), stdout);
  return gfx_report_passed(report.rep) ? kExitOk : kExitThreshold;
}
