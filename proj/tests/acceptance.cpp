// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Exit status is the number of failing criteria (capped at 100).
//
//   acceptance [--only 1,4,12]

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fltorrent/audit.hpp"
#include "fltorrent/bounds.hpp"
#include "fltorrent/config.hpp"
#include "fltorrent/harness.hpp"
#include "fltorrent/maxflow.hpp"
#include "fltorrent/swarm.hpp"
#include "oracles.hpp"

using namespace fltorrent;
namespace fs = std::filesystem;

namespace {

// ---- pinned targets and tolerances ----
constexpr int kSeeds = 20;
constexpr std::uint64_t kBaseSeed = 1;

constexpr int kOracleInstances = 500;
constexpr double kOracleSeconds = 60;

constexpr double kEffLo = 0.85, kEffHi = 1.0;

constexpr double kShareLo = 0.09, kShareHi = 0.16;
constexpr double kUtilLo = 0.65, kUtilHi = 0.90;
constexpr double kRoundTarget = 1965.0, kRoundTol = 0.15;

constexpr double kBetaRatioLo = 6, kBetaRatioHi = 16;

constexpr double kBothTarget[3] = {0.1119, 0.0678, 0.0170};  // sequential, amount_greedy, clustering
constexpr double kBothTol = 0.03;

constexpr double kM5Target = 0.2699, kM25Target = 0.0429, kMTol = 0.05;
constexpr double kRVariation = 0.02;

constexpr double kAnyA5 = 0.1356, kAnyA25 = 0.3082;
constexpr double kPerLo = 0.10, kPerHi = 0.16, kCollTol = 0.05;

constexpr int kAuditLogs = 100;

// ---- helpers ----

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[2048];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

RoundConfig default_config() {
  RoundConfig c;  // n=100, m=10, K=206, beta=0.1, R=0.2, T_lag=3, kappa=1, tau=4, greedy_ff
  c.seed = kBaseSeed;
  return c;
}

RunOptions full_options() {
  RunOptions o;  // all attacks, audit, aggregation
  return o;
}

RunOptions warmup_options(bool bound) {
  RunOptions o;
  o.attacks.clear();
  o.audit = false;
  o.aggregate = false;
  o.track_bound = bound;
  return o;
}

// Memoized runs so criteria sharing a configuration simulate it once.
class RunCache {
 public:
  const MetricsReport& get(const RoundConfig& c, const RunOptions& o) {
    std::string key = to_json(c) + '|' + std::to_string(o.attacks.size()) + std::to_string(o.audit) +
                      std::to_string(o.track_bound) + std::to_string(o.aggregate);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const auto t = Clock::now();
    auto rep = run_experiment(c, o);
    std::fprintf(stderr, "    run n=%d m=%d beta=%g R=%g T_lag=%d sched=%s a=%d seed=%llu: %d slots (%.1f s)\n", c.n, c.m,
                 c.beta, c.R, c.T_lag, to_string(c.scheduler), c.attackers, static_cast<unsigned long long>(c.seed),
                 rep.round_slots, secs_since(t));
    return cache_.emplace(key, std::move(rep)).first->second;
  }

  std::vector<const MetricsReport*> seeds(RoundConfig base, const RunOptions& o, int count = kSeeds) {
    std::vector<const MetricsReport*> out;
    for (auto s : replicate_seeds(kBaseSeed, count)) {
      base.seed = s;
      out.push_back(&get(base, o));
    }
    return out;
  }

 private:
  std::map<std::string, MetricsReport> cache_;
};

RunCache g_runs;

double asr_max(const MetricsReport& r, Attack a, bool warmup_only = false) {
  for (const auto& x : r.asr)
    if (x.attack == a && x.warmup_only == warmup_only) return x.max;
  return -1;
}

double max_over_attacks(const MetricsReport& r) {
  double m = 0;
  for (Attack a : all_attacks()) m = std::max(m, asr_max(r, a));
  return m;
}

double mean_of(const std::vector<const MetricsReport*>& rs, const std::function<double(const MetricsReport&)>& f) {
  std::vector<double> v;
  for (const auto* r : rs) v.push_back(f(*r));
  return mean(v);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---- criteria ----

Outcome c1_maxflow_oracle() {
  const auto t = Clock::now();
  int equal = 0, nonzero = 0;
  std::string first_bad;
  for (int i = 0; i < kOracleInstances; ++i) {
    auto s = oracle::random_stage(derive_seed(20240, {static_cast<std::uint64_t>(i)}), 6, 8, 3);
    const auto want = oracle::stage_max_exhaustive(s->v);
    auto full = build_stage_network(s->v);
    const auto got_full = max_flow(full).value;
    const auto got_red = stage_bound(s->v);
    nonzero += want > 0;
    if (got_full == want && got_red == want) ++equal;
    else if (first_bad.empty()) first_bad = fmt(" first mismatch #%d: exhaustive %lld, flow %lld/%lld", i,
                                                static_cast<long long>(want), static_cast<long long>(got_full),
                                                static_cast<long long>(got_red));
  }
  const double el = secs_since(t);
  return {equal == kOracleInstances && el < kOracleSeconds,
          fmt("%d/%d equal (%d with positive optimum), %.2f s", equal, kOracleInstances, nonzero, el) + first_bad};
}

Outcome c2_bound_dominance() {
  long long stages = 0, violations = 0;
  std::string per;
  for (auto sched : {Scheduler::random_fifo, Scheduler::random_ff, Scheduler::greedy_ff, Scheduler::flooding,
                     Scheduler::distributed}) {
    auto c = default_config();
    c.scheduler = sched;
    c.bt_phase = false;
    long long v = 0, st = 0;
    for (const auto* r : g_runs.seeds(c, warmup_options(true)))
      for (const auto& row : r->stages) {
        ++st;
        v += row.delivered > row.bound;
      }
    stages += st;
    violations += v;
    per += fmt(" %s:%lld/%lld", to_string(sched), v, st);
  }
  return {violations == 0, fmt("%lld violations over %lld stages;", violations, stages) + per};
}

Outcome c3_greedy_efficiency() {
  auto c = default_config();
  c.n = 50;
  c.bt_phase = false;
  std::vector<double> eff;
  for (const auto* r : g_runs.seeds(c, warmup_options(true))) {
    long long d = 0, b = 0;
    for (const auto& row : r->stages) {
      d += row.delivered;
      b += row.bound;
    }
    eff.push_back(b ? static_cast<double>(d) / static_cast<double>(b) : 0.0);
  }
  const double med = median(eff);
  return {med >= kEffLo && med <= kEffHi,
          fmt("median %.4f over %d seeds (min %.4f, max %.4f); target [%.2f, %.2f]", med, kSeeds,
              *std::min_element(eff.begin(), eff.end()), *std::max_element(eff.begin(), eff.end()), kEffLo, kEffHi)};
}

Outcome c4_round_cost() {
  const auto runs = g_runs.seeds(default_config(), full_options());
  const double share = mean_of(runs, [](const auto& r) { return r.warmup_share; });
  const double util = mean_of(runs, [](const auto& r) { return r.utilization; });
  const double secs = mean_of(runs, [](const auto& r) { return r.round_seconds; });
  const double wsecs = mean_of(runs, [](const auto& r) { return r.warmup_seconds; });
  const double lo = kRoundTarget * (1 - kRoundTol), hi = kRoundTarget * (1 + kRoundTol);
  const bool ok_share = share >= kShareLo && share <= kShareHi;
  const bool ok_util = util >= kUtilLo && util <= kUtilHi;
  const bool ok_time = secs >= lo && secs <= hi;
  return {ok_share && ok_util && ok_time,
          fmt("share %.4f [%s, target %.2f-%.2f]; utilization %.4f [%s, target %.2f-%.2f]; round %.1f s [%s, target "
              "%.0f-%.0f]; warm-up %.1f s",
              share, ok_share ? "ok" : "out", kShareLo, kShareHi, util, ok_util ? "ok" : "out", kUtilLo, kUtilHi, secs,
              ok_time ? "ok" : "out", lo, hi, wsecs)};
}

Outcome c5_beta_sweep() {
  std::vector<double> dur;
  std::string pts;
  for (double beta : {0.05, 0.10, 0.15, 0.20, 0.50}) {
    auto c = default_config();
    c.beta = beta;
    c.bt_phase = false;
    const double d = mean_of(g_runs.seeds(c, warmup_options(false)), [](const auto& r) { return r.warmup_seconds; });
    dur.push_back(d);
    pts += fmt(" %.0f%%:%.1f", beta * 100, d);
  }
  bool inc = true;
  for (std::size_t i = 1; i < dur.size(); ++i) inc = inc && dur[i] > dur[i - 1];
  const double ratio = dur.back() / dur.front();
  return {inc && ratio >= kBetaRatioLo && ratio <= kBetaRatioHi,
          fmt("warm-up s%s; %s; ratio %.2f (target %.0f-%.0f)", pts.c_str(), inc ? "strictly increasing" : "NOT increasing",
              ratio, kBetaRatioLo, kBetaRatioHi)};
}

struct Setting {
  const char* name;
  double beta, R;
  int T_lag;
};
constexpr Setting kAblation[4] = {{"None", 0.0001, 0.0, 1}, {"TL", 0.1, 0.0, 3}, {"PR", 0.1, 0.2, 1}, {"Both", 0.1, 0.2, 3}};

Outcome c6_ablation() {
  double v[4][3] = {};
  double w[4][3] = {};
  bool none_exact = true;
  for (int s = 0; s < 4; ++s) {
    auto c = default_config();
    c.beta = kAblation[s].beta;
    c.R = kAblation[s].R;
    c.T_lag = kAblation[s].T_lag;
    const auto runs = g_runs.seeds(c, full_options());
    for (int a = 0; a < 3; ++a) {
      const Attack at = all_attacks()[a];
      v[s][a] = mean_of(runs, [&](const auto& r) { return asr_max(r, at); });
      w[s][a] = mean_of(runs, [&](const auto& r) { return asr_max(r, at, true); });
    }
    if (s == 0)
      for (const auto* r : runs) none_exact = none_exact && asr_max(*r, Attack::sequential) == 1.0;
  }
  bool order = true, both = true;
  std::string detail;
  for (int a = 0; a < 3; ++a) {
    const bool o = v[0][a] > v[1][a] && v[1][a] > v[2][a] && v[2][a] > v[3][a];
    const bool b = std::abs(v[3][a] - kBothTarget[a]) <= kBothTol;
    order = order && o;
    both = both && b;
    detail += fmt(" %s None/TL/PR/Both %.4f/%.4f/%.4f/%.4f (warm-up only %.4f/%.4f/%.4f/%.4f) order %s, Both %s vs %.4f;",
                  to_string(all_attacks()[a]), v[0][a], v[1][a], v[2][a], v[3][a], w[0][a], w[1][a], w[2][a], w[3][a],
                  o ? "ok" : "violated", b ? "ok" : "out", kBothTarget[a]);
  }
  return {none_exact && order && both,
          fmt("None sequential exactly 1 on every seed: %s;", none_exact ? "yes" : "no") + detail};
}

Outcome c7_m_and_R() {
  std::vector<double> mv;
  std::string pts;
  for (int m : {5, 10, 15, 20, 25}) {
    auto c = default_config();
    c.m = m;
    const double x = mean_of(g_runs.seeds(c, full_options()), max_over_attacks);
    mv.push_back(x);
    pts += fmt(" m=%d:%.4f", m, x);
  }
  bool mono = true;
  for (std::size_t i = 1; i < mv.size(); ++i) mono = mono && mv[i] <= mv[i - 1];
  const bool e5 = std::abs(mv.front() - kM5Target) <= kMTol, e25 = std::abs(mv.back() - kM25Target) <= kMTol;

  std::vector<double> rv;
  std::string rpts;
  for (double R : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    auto c = default_config();
    c.R = R;
    const double x = mean_of(g_runs.seeds(c, full_options()), max_over_attacks);
    rv.push_back(x);
    rpts += fmt(" R=%.0f%%:%.4f", R * 100, x);
  }
  const double var = *std::max_element(rv.begin(), rv.end()) - *std::min_element(rv.begin(), rv.end());
  return {mono && e5 && e25 && var < kRVariation,
          fmt("max ASR%s; %s; m=5 %s (%.4f), m=25 %s (%.4f); R sweep%s, spread %.4f (limit %.2f)", pts.c_str(),
              mono ? "non-increasing" : "NOT monotone", e5 ? "ok" : "out", kM5Target, e25 ? "ok" : "out", kM25Target,
              rpts.c_str(), var, kRVariation)};
}

Outcome c8_owner_cap() {
  int ok = 0, total = 0;
  double worst_z = -1e300;
  std::string worst;
  long long emerg_rel = 0, emerg_tx = 0, transfers = 0;
  for (const auto* r : g_runs.seeds(default_config(), full_options())) {
    emerg_rel += r->emergency_releases;
    emerg_tx += r->emergency_transfers;
    const auto N = r->post_threshold_transfers;
    if (N == 0) continue;
    transfers += N;
    ++total;
    const double f = r->owner_fraction(), cap = r->owner_cap_mean;
    const double sigma = std::sqrt(cap * (1 - cap) / static_cast<double>(N));
    const bool pass = f <= cap + 3 * sigma;
    ok += pass;
    const double z = sigma > 0 ? (f - cap) / sigma : (f > cap ? 1e9 : 0);
    if (z > worst_z) {
      worst_z = z;
      worst = fmt("seed %llu: fraction %.5f vs cap %.5f + 3*%.5f over %lld transfers, buffer ratio %.3f",
                  static_cast<unsigned long long>(r->config.seed), f, cap, sigma, static_cast<long long>(N),
                  r->buffer_fraction_ratio);
    }
  }
  return {total > 0 && ok == total,
          fmt("%d/%d runs within cap+3sigma over %lld transfers; worst %s; emergency releases %lld (transfers %lld) "
              "excluded",
              ok, total, transfers, worst.c_str(), emerg_rel, emerg_tx)};
}

Outcome c9_multi_obs() {
  int checked = 0, exact = 0, union_ok = 0, union_n = 0;
  for (int B = 1; B <= 12; ++B)
    for (int O = 0; O <= std::min(3, B); ++O)
      for (int s = 0; s <= B; ++s) {
        std::uint64_t hit = 0, all = 0;
        for (std::uint32_t m = 0; m < (1u << B); ++m) {
          if (std::popcount(m) != s) continue;
          ++all;
          hit += (m & ((1u << O) - 1)) != 0;
        }
        const auto fr = multi_obs_exact_fraction(B, O, s);
        const double d = multi_obs_exact(B, O, s);
        ++checked;
        exact += fr.first == hit && fr.second == all &&
                 std::abs(d - static_cast<double>(hit) / static_cast<double>(all)) <= 1e-12;
        if (O >= 1) {
          ++union_n;
          union_ok += multi_obs_union(O, B - O, s) + 1e-12 >= d;
        }
      }
  return {exact == checked && union_ok == union_n,
          fmt("%d/%d (B,O,s) exact against enumeration; union >= exact on %d/%d", exact, checked, union_ok, union_n)};
}

Outcome c10_collusion() {
  double any[2], per[2], pooled[2];
  const int sizes[2] = {5, 25};
  for (int i = 0; i < 2; ++i) {
    auto c = default_config();
    c.attackers = sizes[i];
    c.phi = 1.0;
    const auto runs = g_runs.seeds(c, full_options());
    auto pick = [](const MetricsReport& r, auto field) {
      for (const auto& x : r.collusion)
        if (x.attack == Attack::sequential) return field(x);
      return -1.0;
    };
    any[i] = mean_of(runs, [&](const auto& r) { return pick(r, [](const CollusionRow& x) { return x.any_succeeds; }); });
    per[i] = mean_of(runs, [&](const auto& r) { return pick(r, [](const CollusionRow& x) { return x.per_attacker; }); });
    pooled[i] = mean_of(runs, [&](const auto& r) { return pick(r, [](const CollusionRow& x) { return x.pooled; }); });
  }
  const bool rises = any[1] > any[0];
  const bool a5 = std::abs(any[0] - kAnyA5) <= kCollTol, a25 = std::abs(any[1] - kAnyA25) <= kCollTol;
  bool pa = true;
  for (double p : per) pa = pa && p >= kPerLo - kCollTol && p <= kPerHi + kCollTol;
  return {rises && a5 && a25 && pa,
          fmt("sequential, phi=1: any-succeeds a=5 %.4f, a=25 %.4f (%s; endpoints %s/%s vs %.4f/%.4f); per-attacker "
              "%.4f/%.4f (%s, band %.2f-%.2f); pooled %.4f/%.4f",
              any[0], any[1], rises ? "rises" : "does NOT rise", a5 ? "ok" : "out", a25 ? "ok" : "out", kAnyA5, kAnyA25,
              per[0], per[1], pa ? "ok" : "out", kPerLo - kCollTol, kPerHi + kCollTol, pooled[0], pooled[1])};
}

// Centralized FedAvg and FNV-1a, written out independently of the library.
std::vector<double> central_fedavg(const std::vector<UpdateVector>& u, const std::vector<NodeId>& members) {
  double W = 0;
  for (NodeId v : members) W += u[v].weight;
  std::vector<double> agg(u[members.front()].values.size(), 0.0);
  for (NodeId v : members)
    for (std::size_t i = 0; i < agg.size(); ++i) agg[i] += (u[v].weight / W) * u[v].values[i];
  return agg;
}

std::string fnv_hex(const std::vector<double>& v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double x : v) {
    unsigned char b[8];
    std::memcpy(b, &x, 8);
    for (unsigned char c : b) h = (h ^ c) * 0x100000001b3ULL;
  }
  return fmt("%016llx", static_cast<unsigned long long>(h));
}

Outcome c11_aggregation() {
  auto c = default_config();
  c.n = 30;
  c.m = 5;
  c.K = 24;
  std::string detail;
  bool pass = true;
  for (int variant = 0; variant < 2; ++variant) {
    auto cfg = c;
    if (variant == 1) cfg.fault_spec.dropouts.push_back({7, 0});  // node 7 leaves before sending anything scheduled
    RunOptions o;
    o.attacks.clear();
    const auto run = run_round(cfg, o);
    const auto updates = synthetic_updates(cfg.n, cfg.vector_len, derive_seed(cfg.seed, {0xa99}));
    std::vector<NodeId> everyone(cfg.n);
    for (NodeId v = 0; v < cfg.n; ++v) everyone[v] = v;
    const auto central = fnv_hex(central_fedavg(updates, everyone));
    int nodes = 0, match = 0, full = 0;
    std::map<std::vector<NodeId>, std::string> by_set;
    bool pairwise = true;
    for (const auto& row : run.report.aggregation) {
      ++nodes;
      std::vector<NodeId> A;
      for (NodeId u = 0; u < cfg.n; ++u) {
        bool all = true;
        for (ChunkIndex x = run.state.universe.begin(u); x < run.state.universe.end(u) && all; ++x)
          all = run.state.inv[row.node].has(x);
        if (all) A.push_back(u);
      }
      full += static_cast<int>(A.size()) == cfg.n;
      match += row.checksum == fnv_hex(central_fedavg(updates, A)) && static_cast<int>(A.size()) == row.reconstructable;
      const auto [it, fresh] = by_set.emplace(A, row.checksum);
      pairwise = pairwise && (fresh || it->second == row.checksum);
    }
    if (variant == 0) {
      bool all_central = true;
      for (const auto& row : run.report.aggregation) all_central = all_central && row.checksum == central;
      pass = pass && run.report.disseminated && nodes == cfg.n && full == cfg.n && all_central && match == nodes;
      detail += fmt("full dissemination: %d/%d nodes equal centralized FedAvg %s; ", full, nodes, central.c_str());
    } else {
      const bool excluded = by_set.size() == 1 && static_cast<int>(by_set.begin()->first.size()) == cfg.n - 1 &&
                            !std::binary_search(by_set.begin()->first.begin(), by_set.begin()->first.end(), 7);
      pass = pass && nodes == cfg.n - 1 && match == nodes && pairwise && excluded;
      detail += fmt("node 7 dropped: %d nodes aggregate over %zu set(s) of %zu updates, %d/%d match the oracle, pairwise %s",
                    nodes, by_set.size(), by_set.empty() ? 0 : by_set.begin()->first.size(), match, nodes,
                    pairwise ? "equal" : "DIFFER");
    }
  }
  return {pass, detail};
}

Outcome c12_audit() {
  RoundConfig c;
  c.n = 30;
  c.m = 5;
  c.K = 30;
  RunOptions o;
  o.attacks.clear();
  o.aggregate = false;
  o.audit = false;
  int honest = 0, rejected = 0;
  int per_kind[3] = {0, 0, 0}, per_kind_ok[3] = {0, 0, 0};
  const char* kinds[3] = {"adjacency", "cap", "duplicate"};
  std::string first_bad;
  for (int i = 0; i < kAuditLogs; ++i) {
    c.seed = 1000 + static_cast<std::uint64_t>(i);
    const auto run = run_round(c, o);
    const auto& log = run.log;
    honest += verify_round_log(log.commit, c.seed, log, c).accept;

    Rng rng(derive_seed(c.seed, {0xa0d17}));
    std::vector<std::size_t> scheduled;
    for (std::size_t k = 0; k < log.directives.size(); ++k)
      if (!(log.directives[k].flags & kSpray)) scheduled.push_back(k);
    auto bad = log;
    const int kind = i % 3;
    if (kind == 0) {
      // move one delivery's receiver to a node the sender is not linked to
      for (;;) {
        auto& d = bad.directives[scheduled[rng.below(scheduled.size())]];
        std::vector<NodeId> far;
        for (NodeId w = 0; w < c.n; ++w)
          if (w != d.sender && !run.overlay.adjacent(d.sender, w)) far.push_back(w);
        if (far.empty()) continue;
        d.receiver = far[rng.below(far.size())];
        break;
      }
    } else if (kind == 1) {
      // one more send for a (stage, sender) that already used its whole uplink
      const auto caps = sample_capacities(c);
      std::map<std::pair<int, NodeId>, int> sends;
      for (std::size_t k : scheduled) ++sends[{log.directives[k].stage, log.directives[k].sender}];
      std::vector<std::pair<int, NodeId>> full;
      for (const auto& [key, n] : sends)
        if (n >= caps[key.second].up_chunks) full.push_back(key);
      const auto key = full[rng.below(full.size())];
      std::size_t at = 0;
      while (at < bad.directives.size() && bad.directives[at].stage <= key.first) ++at;
      const auto& nb = run.overlay.neighbors(key.second);
      const NodeId w = nb[rng.below(nb.size())];
      bad.directives.insert(bad.directives.begin() + static_cast<std::ptrdiff_t>(at),
                            LogEntry{key.first, key.second, w, key.second, 1, kScheduled});
    } else {
      // replay an earlier delivery in a fresh final stage
      auto d = log.directives[scheduled[rng.below(scheduled.size())]];
      d.stage = log.directives.back().stage + 1;
      bad.directives.push_back(d);
    }
    const auto v = verify_round_log(log.commit, c.seed, bad, c);
    ++per_kind[kind];
    const bool right = !v.accept && v.reason == kinds[kind];
    per_kind_ok[kind] += right;
    rejected += right;
    if (!right && first_bad.empty())
      first_bad = fmt("; seed %llu %s mutation gave '%s'", static_cast<unsigned long long>(c.seed), kinds[kind],
                      v.accept ? "accept" : v.reason.c_str());
  }
  return {honest == kAuditLogs && rejected == kAuditLogs,
          fmt("%d/%d honest accepted; %d/%d mutated rejected with the right reason (endpoint %d/%d, cap %d/%d, duplicate "
              "%d/%d)",
              honest, kAuditLogs, rejected, kAuditLogs, per_kind_ok[0], per_kind[0], per_kind_ok[1], per_kind[1],
              per_kind_ok[2], per_kind[2]) +
              first_bad};
}

std::map<std::string, std::string> read_dir(const fs::path& d) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(d)) {
    std::ifstream is(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome c13_determinism() {
  const auto cfg = default_config();
  const auto base = fs::temp_directory_path() / "fltorrent_acceptance_determinism";
  fs::remove_all(base);
  std::string obs[2], log[2];
  for (int i = 0; i < 2; ++i) {
    const auto run = run_round(cfg, full_options());
    obs[i] = observations_csv(run.state);
    log[i] = serialize(run.log);
    emit_report({run.report}, (base / std::to_string(i)).string());
  }
  const auto a = read_dir(base / "0"), b = read_dir(base / "1");
  fs::remove_all(base);
  int same = 0;
  for (const auto& [name, text] : a) same += b.count(name) && b.at(name) == text;
  const bool files = same == static_cast<int>(a.size()) && a.size() == b.size();
  return {obs[0] == obs[1] && log[0] == log[1] && files,
          fmt("observation log %zu bytes %s; round log %s; %d/%zu CSV/report files identical", obs[0].size(),
              obs[0] == obs[1] ? "identical" : "DIFFERS", log[0] == log[1] ? "identical" : "DIFFERS", same, a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string x;
      while (std::getline(ss, x, ',')) only.push_back(std::stoi(x));
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2,...]\n", argv[0]);
      return 100;
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"max-flow equals exhaustive search", c1_maxflow_oracle},
      {"heuristics never exceed the stage bound", c2_bound_dominance},
      {"greedy fastest-first efficiency", c3_greedy_efficiency},
      {"round cost at n=100", c4_round_cost},
      {"warm-up duration over beta", c5_beta_sweep},
      {"defense ablation", c6_ablation},
      {"overlay degree and spray ratio sweeps", c7_m_and_R},
      {"post-threshold owner fraction under the cap", c8_owner_cap},
      {"repeated-observation bound", c9_multi_obs},
      {"coalitions", c10_collusion},
      {"aggregation agreement", c11_aggregation},
      {"round-log audit", c12_audit},
      {"determinism", c13_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    std::fprintf(stderr, "[%2d] %s ...\n", id, criteria[i].first);
    const auto t = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                secs_since(t));
    std::fflush(stdout);
  }
  return std::min(failed, 100);
}
