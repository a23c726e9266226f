#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fltorrent/attacks.hpp"
#include "fltorrent/audit.hpp"
#include "fltorrent/engine.hpp"
#include "fltorrent/overlay.hpp"
#include "fltorrent/types.hpp"
#include "fltorrent/warmup.hpp"

namespace fltorrent {

struct RunOptions {
  std::vector<Attack> attacks = all_attacks();  // empty: skip attacks
  bool audit = true;
  bool track_bound = false;  // max-flow value of every warm-up stage view
  bool track_q = true;
  bool aggregate = true;
};

struct AsrRow {
  Attack attack = Attack::sequential;
  bool warmup_only = false;
  double max = 0;
  double mean = 0;
  int receivers = 0;
};

struct CollusionRow {
  Attack attack = Attack::sequential;
  int attackers = 0;
  double phi = 0;
  double per_attacker = 0;
  double any_succeeds = 0;
  double pooled = 0;
};

struct StageRow {
  int stage = 0;
  std::int64_t delivered = 0;  // directives issued this stage that executed
  std::int64_t carried = 0;    // deferred directives from earlier stages that executed
  std::int64_t bound = -1;  // -1 when not tracked
  std::optional<double> q;
};

struct BoundsRow {
  int kappa = 1;
  std::int64_t k_beta = 0, K = 0, h = 0;
  double mu = 0, m = 0;
  int T_lag = 1;
  double q = 0, eps = 0.1;
  double per_transfer = 0, mixing = 0, eta = 0, multi_obs_exact = 0, multi_obs_union = 0;
  double phi = 0, rho = 0;
  double coalition = 0, coalition_mixing = 0, coalition_multi = 0;
  std::int64_t s = 0, B_star = 0, O_star = 0;
};

struct AggregateRow {
  NodeId node = 0;
  int reconstructable = 0;
  std::string checksum;
};

struct MetricsReport {
  RoundConfig config;
  std::int64_t k_beta = 0;
  int warmup_slots = 0;
  int round_slots = 0;
  double warmup_seconds = 0;
  double round_seconds = 0;
  double warmup_share = 0;
  double utilization = 0;        // warm-up horizon
  double round_utilization = 0;  // whole round
  std::vector<std::pair<int, double>> k_achievement;
  std::vector<StageRow> stages;
  std::int64_t emergency_releases = 0;
  std::int64_t spray_chunks = 0;
  bool fail_open = false;
  bool disseminated = false;

  // Honest senders after crossing the threshold, emergency releases excluded.
  std::int64_t post_threshold_transfers = 0;
  std::int64_t post_threshold_owner = 0;
  double owner_cap_mean = 0;          // mean kappa/(kappa+h_u) over those transfers
  double buffer_fraction_ratio = 0;   // max over serving instants of (O_u/B_u) / cap
  std::int64_t emergency_transfers = 0;

  std::vector<AsrRow> asr;
  std::vector<CollusionRow> collusion;
  BoundsRow bounds;
  std::vector<AggregateRow> aggregation;
  bool aggregation_agree = true;  // equal reconstructable sets give equal checksums

  std::optional<Verdict> audit;
  std::vector<std::string> warnings;

  double owner_fraction() const {
    return post_threshold_transfers ? static_cast<double>(post_threshold_owner) / post_threshold_transfers : 0.0;
  }
};

// Everything a round leaves behind, for tests and tools that need the traces.
struct RoundRun {
  RoundConfig config;
  Overlay overlay;
  SimState state;
  WarmupState warmup;
  MetricsReport report;
  RoundLog log;
};

// spray -> lags -> warm-up scheduling -> BitTorrent swarming -> FedAvg -> audit.
RoundRun run_round(const RoundConfig& cfg, const RunOptions& opt = {});
MetricsReport run_experiment(const RoundConfig& cfg, const RunOptions& opt = {});

// Replicate r of every sweep point runs with seed base.seed + r, so all points share one seed set.
std::vector<std::uint64_t> replicate_seeds(std::uint64_t base, int replicates);

// axis is any config key (n, m, beta, R, attackers, ...). Runs on `jobs` threads.
std::vector<MetricsReport> run_sweep(const RoundConfig& base, const std::string& axis, const std::vector<std::string>& values,
                                     int replicates = 1, const RunOptions& opt = {}, int jobs = 1);

// "none", or '+'-joined subset of gating, spray, lag.
std::string defenses_label(const RoundConfig& cfg);

// CSV writers; each throws std::runtime_error naming the path on I/O failure.
void emit_report(const std::vector<MetricsReport>& reports, const std::string& dir);
std::string observations_csv(const SimState& s);
std::string observations_csv(const std::vector<ObservationRecord>& obs);
std::string format_double(double x);

}  // namespace fltorrent
