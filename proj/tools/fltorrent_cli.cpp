// Command-line driver over the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fltorrent/fltorrent.h"

namespace {

int report_error(const char* what, flt_status s) {
  std::fprintf(stderr, "fltorrent: %s: %s\n", what, flt_last_error());
  return s == FLT_ERR_CONFIG ? 2 : s == FLT_ERR_AUDIT ? 3 : 1;
}

void print_summary(const flt_report* rep) {
  const char* keys[] = {"seed", "warmup_slots", "round_slots", "warmup_share", "utilization", "round_seconds", "emergency_releases"};
  for (std::size_t i = 0; i < flt_report_count(rep); ++i) {
    for (const char* k : keys) {
      double v = 0;
      if (flt_report_get(rep, i, k, &v) == FLT_OK) std::printf("%s=%g ", k, v);
    }
    for (const char* a : {"sequential", "amount_greedy", "clustering"}) {
      double v = 0;
      const std::string key = std::string("asr_max:") + a;
      if (flt_report_get(rep, i, key.c_str(), &v) == FLT_OK) std::printf("%s=%g ", key.c_str(), v);
    }
    const char* reason = flt_report_audit_reason(rep, i);
    std::printf("audit=%s\n", *reason ? reason : "ok");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FLTorrent round simulator"};
  app.require_subcommand(1);

  std::string config_path, sweep, out_dir, attacks = "all", audit;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int replicates = 1, jobs = 1;
  bool observations = false;
  auto* run = app.add_subcommand("run", "simulate one round or a sweep");
  run->add_option("--config", config_path, "JSON config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_option("--sweep", sweep, "axis=v1,v2,... over any config key");
  run->add_option("--replicates", replicates, "seeds per sweep point (seed, seed+1, ...)")->check(CLI::PositiveNumber);
  run->add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "directory for CSV reports");
  run->add_option("--attacks", attacks, "all, none, or a comma list");
  run->add_option("--audit", audit, "'verify' fails the run when the round log is rejected")->check(CLI::IsMember({"verify", "off"}));
  run->add_option("--set", sets, "key=value config override (repeatable)");
  run->add_flag("--observations", observations, "also write observations.csv (single runs)");

  std::string log_path, commit;
  auto* verify = app.add_subcommand("verify", "check a round log against a config and revealed seed");
  std::string vconfig;
  std::uint64_t vseed = 0;
  verify->add_option("--config", vconfig, "JSON config file")->required();
  verify->add_option("--log", log_path, "round log file")->required();
  verify->add_option("--seed", vseed, "revealed seed")->required();
  verify->add_option("--commit", commit, "published commitment (defaults to the log header)");

  CLI11_PARSE(app, argc, argv);

  flt_config* cfg = nullptr;
  if (*run) {
    if (auto s = flt_config_load(config_path.c_str(), &cfg); s != FLT_OK) return report_error("config", s);
    if (seed_opt->count()) {
      const auto v = std::to_string(seed);
      if (auto s = flt_config_set(cfg, "seed", v.c_str()); s != FLT_OK) return report_error("config", s);
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "fltorrent: --set expects key=value, got '%s'\n", kv.c_str());
        return 2;
      }
      if (auto s = flt_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()); s != FLT_OK)
        return report_error("config", s);
    }
    const bool do_audit = audit != "off";
    flt_report* rep = nullptr;
    flt_status s;
    if (!sweep.empty()) {
      const auto eq = sweep.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "fltorrent: --sweep expects axis=v1,v2,...\n");
        return 2;
      }
      s = flt_sweep(cfg, sweep.substr(0, eq).c_str(), sweep.substr(eq + 1).c_str(), replicates, attacks.c_str(), do_audit,
                    jobs, &rep);
    } else {
      s = flt_run(cfg, attacks.c_str(), do_audit, &rep);
    }
    flt_config_free(cfg);
    if (s != FLT_OK) return report_error("run", s);
    print_summary(rep);
    int rc = 0;
    if (!out_dir.empty()) {
      if (auto e = flt_report_emit(rep, out_dir.c_str()); e != FLT_OK) rc = report_error("emit", e);
      if (sweep.empty() && rc == 0) {
        const auto p = (std::filesystem::path(out_dir) / "round_log.txt").string();
        if (auto e = flt_report_write_log(rep, p.c_str()); e != FLT_OK) rc = report_error("emit", e);
        if (observations && rc == 0) {
          const auto o = (std::filesystem::path(out_dir) / "observations.csv").string();
          if (auto e = flt_report_write_observations(rep, o.c_str()); e != FLT_OK) rc = report_error("emit", e);
        }
      }
    }
    if (audit == "verify")
      for (std::size_t i = 0; i < flt_report_count(rep); ++i)
        if (*flt_report_audit_reason(rep, i)) {
          std::fprintf(stderr, "fltorrent: audit rejected report %zu: %s\n", i, flt_report_audit_reason(rep, i));
          rc = 3;
        }
    flt_report_free(rep);
    return rc;
  }

  if (auto s = flt_config_load(vconfig.c_str(), &cfg); s != FLT_OK) return report_error("config", s);
  const auto s = flt_verify_log(log_path.c_str(), cfg, commit.c_str(), vseed);
  flt_config_free(cfg);
  if (s != FLT_OK) return report_error("verify", s);
  std::printf("accept\n");
  return 0;
}
