#include "fltorrent/fltorrent.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <fstream>
#include <sstream>
#include <string>

#include "fltorrent/audit.hpp"
#include "fltorrent/config.hpp"
#include "fltorrent/harness.hpp"

struct flt_config {
  fltorrent::RoundConfig cfg;
};

struct flt_report {
  std::vector<fltorrent::MetricsReport> reports;
  // Single runs keep their traces; text is produced only when written.
  std::optional<fltorrent::RoundLog> log;
  std::optional<std::vector<fltorrent::ObservationRecord>> observations;
};

namespace {

thread_local std::string g_error;

flt_status fail(flt_status s, std::string msg) {
  g_error = std::move(msg);
  return s;
}

template <class F>
flt_status guard(F&& f) {
  try {
    g_error.clear();
    return f();
  } catch (const fltorrent::ConfigError& e) {
    return fail(FLT_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(FLT_ERR_CONFIG, e.what());
  } catch (const std::domain_error& e) {
    return fail(FLT_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(FLT_ERR_INTERNAL, e.what());
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string x;
  while (std::getline(ss, x, sep))
    if (!x.empty()) out.push_back(x);
  return out;
}

fltorrent::RunOptions options(const char* attacks, int audit) {
  fltorrent::RunOptions o;
  o.audit = audit != 0;
  const std::string a = attacks ? attacks : "all";
  if (a == "none") o.attacks.clear();
  else if (a != "all") {
    o.attacks.clear();
    for (const auto& x : split(a, ',')) o.attacks.push_back(fltorrent::parse_attack(x));
  }
  return o;
}

// Bad attack names are argument errors, not configuration errors.
flt_status parse_options(const char* attacks, int audit, fltorrent::RunOptions& out) {
  try {
    out = options(attacks, audit);
    return FLT_OK;
  } catch (const std::exception& e) {
    return fail(FLT_ERR_ARG, e.what());
  }
}

}  // namespace

extern "C" {

const char* flt_last_error(void) { return g_error.c_str(); }
const char* flt_version(void) { return "1.0.0"; }

flt_status flt_config_default(flt_config** out) {
  if (!out) return fail(FLT_ERR_ARG, "null output");
  return guard([&] {
    *out = new flt_config{};
    return FLT_OK;
  });
}

flt_status flt_config_parse(const char* json, flt_config** out) {
  if (!json || !out) return fail(FLT_ERR_ARG, "null argument");
  return guard([&] {
    auto c = fltorrent::parse_config(json);
    *out = new flt_config{c};
    return FLT_OK;
  });
}

flt_status flt_config_load(const char* path, flt_config** out) {
  if (!path || !out) return fail(FLT_ERR_ARG, "null argument");
  std::ifstream f(path);
  if (!f) return fail(FLT_ERR_IO, std::string("cannot open ") + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return flt_config_parse(ss.str().c_str(), out);
}

flt_status flt_config_set(flt_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(FLT_ERR_ARG, "null argument");
  return guard([&] {
    fltorrent::set_field(cfg->cfg, key, value);
    return FLT_OK;
  });
}

flt_status flt_config_json(const flt_config* cfg, char** out) {
  if (!cfg || !out) return fail(FLT_ERR_ARG, "null argument");
  return guard([&] {
    const auto s = fltorrent::to_json(cfg->cfg);
    *out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(*out, s.c_str(), s.size() + 1);
    return FLT_OK;
  });
}

void flt_config_free(flt_config* cfg) { delete cfg; }

flt_status flt_run(const flt_config* cfg, const char* attacks, int audit, flt_report** out) {
  if (!cfg || !out) return fail(FLT_ERR_ARG, "null argument");
  fltorrent::RunOptions opt;
  if (const auto st = parse_options(attacks, audit, opt); st != FLT_OK) return st;
  return guard([&] {
    auto run = fltorrent::run_round(cfg->cfg, opt);
    auto* r = new flt_report{};
    r->log = std::move(run.log);
    r->observations = std::move(run.state.observations);
    r->reports.push_back(std::move(run.report));
    *out = r;
    return FLT_OK;
  });
}

flt_status flt_sweep(const flt_config* cfg, const char* axis, const char* values, int replicates, const char* attacks,
                     int audit, int jobs, flt_report** out) {
  if (!cfg || !axis || !values || !out) return fail(FLT_ERR_ARG, "null argument");
  if (replicates < 1) return fail(FLT_ERR_ARG, "replicates must be positive");
  fltorrent::RunOptions opt;
  if (const auto st = parse_options(attacks, audit, opt); st != FLT_OK) return st;
  return guard([&] {
    auto r = std::make_unique<flt_report>();
    r->reports = fltorrent::run_sweep(cfg->cfg, axis, split(values, ','), replicates, opt, jobs);
    *out = r.release();
    return FLT_OK;
  });
}

size_t flt_report_count(const flt_report* rep) { return rep ? rep->reports.size() : 0; }

flt_status flt_report_get(const flt_report* rep, size_t index, const char* name, double* out) {
  if (!rep || !name || !out) return fail(FLT_ERR_ARG, "null argument");
  if (index >= rep->reports.size()) return fail(FLT_ERR_ARG, "report index out of range");
  const auto& r = rep->reports[index];
  const std::string k = name;
  const auto colon = k.find(':');
  if (colon != std::string::npos) {
    const auto what = k.substr(0, colon);
    fltorrent::Attack a;
    try {
      a = fltorrent::parse_attack(k.substr(colon + 1));
    } catch (const std::exception& e) {
      return fail(FLT_ERR_ARG, e.what());
    }
    for (const auto& x : r.asr)
      if (x.attack == a && !x.warmup_only) {
        if (what == "asr_max") return *out = x.max, FLT_OK;
        if (what == "asr_mean") return *out = x.mean, FLT_OK;
      } else if (x.attack == a && x.warmup_only) {
        if (what == "asr_max_warmup") return *out = x.max, FLT_OK;
        if (what == "asr_mean_warmup") return *out = x.mean, FLT_OK;
      }
    for (const auto& x : r.collusion)
      if (x.attack == a) {
        if (what == "per_attacker") return *out = x.per_attacker, FLT_OK;
        if (what == "any_succeeds") return *out = x.any_succeeds, FLT_OK;
        if (what == "pooled") return *out = x.pooled, FLT_OK;
      }
    return fail(FLT_ERR_ARG, "no metric " + k);
  }
  const std::pair<const char*, double> table[] = {
      {"k_beta", static_cast<double>(r.k_beta)},
      {"warmup_slots", static_cast<double>(r.warmup_slots)},
      {"round_slots", static_cast<double>(r.round_slots)},
      {"warmup_seconds", r.warmup_seconds},
      {"round_seconds", r.round_seconds},
      {"warmup_share", r.warmup_share},
      {"utilization", r.utilization},
      {"round_utilization", r.round_utilization},
      {"emergency_releases", static_cast<double>(r.emergency_releases)},
      {"spray_chunks", static_cast<double>(r.spray_chunks)},
      {"fail_open", r.fail_open ? 1.0 : 0.0},
      {"disseminated", r.disseminated ? 1.0 : 0.0},
      {"owner_fraction", r.owner_fraction()},
      {"owner_cap", r.owner_cap_mean},
      {"audit_accept", r.audit && r.audit->accept ? 1.0 : 0.0},
      {"seed", static_cast<double>(r.config.seed)},
  };
  for (const auto& [key, v] : table)
    if (k == key) return *out = v, FLT_OK;
  return fail(FLT_ERR_ARG, "no metric " + k);
}

const char* flt_report_audit_reason(const flt_report* rep, size_t index) {
  static const char* empty = "";
  if (!rep || index >= rep->reports.size() || !rep->reports[index].audit) return empty;
  return rep->reports[index].audit->reason.c_str();
}

flt_status flt_report_emit(const flt_report* rep, const char* dir) {
  if (!rep || !dir) return fail(FLT_ERR_ARG, "null argument");
  try {
    fltorrent::emit_report(rep->reports, dir);
    return FLT_OK;
  } catch (const std::exception& e) {
    return fail(FLT_ERR_IO, e.what());
  }
}

namespace {
flt_status write_text(const std::string& text, const char* path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) return fail(FLT_ERR_IO, std::string("cannot write ") + path);
  f << text;
  if (!f) return fail(FLT_ERR_IO, std::string("write failed for ") + path);
  return FLT_OK;
}
}  // namespace

flt_status flt_report_write_log(const flt_report* rep, const char* path) {
  if (!rep || !path) return fail(FLT_ERR_ARG, "null argument");
  if (!rep->log) return fail(FLT_ERR_ARG, "round log is kept for single runs only");
  return write_text(fltorrent::serialize(*rep->log), path);
}

flt_status flt_report_write_observations(const flt_report* rep, const char* path) {
  if (!rep || !path) return fail(FLT_ERR_ARG, "null argument");
  if (!rep->observations) return fail(FLT_ERR_ARG, "observations are kept for single runs only");
  return write_text(fltorrent::observations_csv(*rep->observations), path);
}

void flt_report_free(flt_report* rep) { delete rep; }

flt_status flt_commit_seed(uint64_t seed, char out[65]) {
  if (!out) return fail(FLT_ERR_ARG, "null output");
  return guard([&] {
    const auto h = fltorrent::commit_seed(seed);
    std::memcpy(out, h.c_str(), 65);
    return FLT_OK;
  });
}

flt_status flt_verify_log(const char* path, const flt_config* cfg, const char* commit, uint64_t seed) {
  if (!path || !cfg || !commit) return fail(FLT_ERR_ARG, "null argument");
  std::ifstream f(path);
  if (!f) return fail(FLT_ERR_IO, std::string("cannot open ") + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return guard([&] {
    fltorrent::RoundLog log;
    try {
      log = fltorrent::parse_round_log(ss.str());
    } catch (const std::runtime_error& e) {
      return fail(FLT_ERR_AUDIT, std::string("malformed: ") + e.what());
    }
    const std::string c = *commit ? commit : log.commit;
    const auto v = fltorrent::verify_round_log(c, seed, log, cfg->cfg);
    if (!v.accept) return fail(FLT_ERR_AUDIT, v.reason + ": " + v.detail);
    return FLT_OK;
  });
}

void flt_string_free(char* s) { std::free(s); }

}  // extern "C"
