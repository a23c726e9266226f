#include "fltorrent/harness.hpp"

#include <cstring>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <limits>
#include <mutex>
#include <cstdio>
#include <unordered_set>

#include "fltorrent/bounds.hpp"
#include "fltorrent/config.hpp"
#include "fltorrent/maxflow.hpp"
#include "fltorrent/schedulers.hpp"
#include "fltorrent/swarm.hpp"

namespace fltorrent {

namespace {

std::vector<NodeId> pick_coalition(const RoundConfig& cfg) {
  if (cfg.attackers <= 1) return {};
  std::vector<NodeId> ids(cfg.n);
  for (NodeId v = 0; v < cfg.n; ++v) ids[v] = v;
  Rng rng(derive_seed(cfg.seed, {0xc011}));
  const int a = std::min(cfg.attackers, cfg.n);
  for (int i = 0; i < a; ++i) std::swap(ids[i], ids[i + rng.below(static_cast<std::uint64_t>(cfg.n - i))]);
  ids.resize(a);
  std::sort(ids.begin(), ids.end());
  return ids;
}

int owner_bits(const Bitset& b, const ChunkUniverse& u, NodeId v) {
  int c = 0;
  for (ChunkIndex x = u.begin(v); x < u.end(v); ++x) c += b.test(x);
  return c;
}

// Drops pending directives that can no longer execute and reserves budget for the rest.
void reserve_pending(std::vector<TransferDirective>& pending, const SimState& s, std::vector<int>& up, std::vector<int>& down) {
  std::erase_if(pending, [&](const TransferDirective& d) {
    return !s.active[d.sender] || !s.active[d.receiver] || s.inv[d.receiver].has(d.chunk);
  });
  for (const auto& d : pending) {
    up[d.sender] = std::max(0, up[d.sender] - 1);
    down[d.receiver] = std::max(0, down[d.receiver] - 1);
  }
}

}  // namespace

std::string defenses_label(const RoundConfig& cfg) {
  std::string out;
  auto add = [&](const char* s) {
    if (!out.empty()) out += '+';
    out += s;
  };
  const ChunkUniverse u(chunk_counts(cfg), cfg.round);
  int kmax = 0;
  for (NodeId v = 0; v < u.nodes(); ++v) kmax = std::max(kmax, u.K(v));
  if (compute_k_beta(cfg.beta, u.total()) > kmax) add("gating");
  if (static_cast<int>(cfg.R * cfg.K + 1e-9) > 0) add("spray");
  if (cfg.T_lag > 1) add("lag");
  return out.empty() ? "none" : out;
}

RoundRun run_round(const RoundConfig& cfg, const RunOptions& opt) {
  validate(cfg);
  RoundRun run;
  run.config = cfg;
  MetricsReport& rep = run.report;
  rep.config = cfg;
  const ChunkUniverse u(chunk_counts(cfg), cfg.round);
  if (cfg.heterogeneous_K) rep.warnings.push_back("heterogeneous update sizes: per-node cover deficits h_u differ");
  const auto caps = sample_capacities(cfg);
  run.overlay = generate_overlay(cfg.n, cfg.m, cfg.seed);
  const Overlay& g = run.overlay;
  run.state = make_state(u, caps, cfg.seed, cfg.fault_spec);
  SimState& s = run.state;
  const int n = cfg.n;
  const std::int64_t kb = compute_k_beta(cfg.beta, u.total());
  rep.k_beta = kb;

  const auto spray = preround_spray(g, u, cfg.R, cfg.seed);
  rep.warnings.insert(rep.warnings.end(), spray.warnings.begin(), spray.warnings.end());
  const auto sr = apply_spray(s, spray.directives);
  rep.spray_chunks = static_cast<std::int64_t>(sr.executed.size());

  WarmupState& ws = run.warmup;
  ws.init(s, kb, cfg.kappa, sample_lags(n, cfg.T_lag, cfg.seed));
  for (const auto& d : sr.executed) ws.sprayed.push_back({d.receiver, d.chunk});

  std::vector<std::uint8_t> byz(n, 0);
  bool liars = false;
  for (const auto& b : cfg.fault_spec.byz_nodes) {
    byz[b.node] = 1;
    liars = liars || b.behavior == ByzBehavior::lie_bitfield;
  }
  std::vector<double> cap(n);
  for (NodeId v = 0; v < n; ++v) cap[v] = per_transfer_bound(cfg.kappa, kb, u.K(v));

  const auto members = pick_coalition(cfg);
  std::vector<std::uint8_t> is_member(n, 0);
  for (NodeId v : members) is_member[v] = 1;

  Rng lie_rng(derive_seed(cfg.seed, {0x11e}));
  const std::uint64_t sched_seed = derive_seed(cfg.seed, {0x5c4ed});
  FloodHistory flood;
  std::vector<TransferDirective> pending;
  bool arm = false;
  std::int64_t q_inst = 0, q_good = 0;
  double cap_sum = 0;
  std::map<std::pair<NodeId, NodeId>, std::int64_t> pair_obs;
  std::vector<std::int64_t> b_min(n, std::numeric_limits<std::int64_t>::max()), o_max(n, 0);
  std::vector<int> b_stage(n, -1), o_stage(n, 0), b_size(n, 0);

  auto decision = warmup_complete(s, kb, cfg.s_max);
  while (decision == WarmupDecision::continue_warmup) {
    std::fill(ws.emergency.begin(), ws.emergency.end(), 0);
    if (arm)
      for (NodeId v = 0; v < n; ++v) ws.emergency[v] = s.active[v] && s.inv[v].count < kb;
    StageView view = make_stage_view(s, g, ws, cfg.tau, cfg.non_owner_first, liars ? &lie_rng : nullptr);
    reserve_pending(pending, s, view.res_up, view.res_down);

    StageRow row;
    row.stage = s.slot;
    if (opt.track_q) {
      const auto [inst, good] = q_instances(view);
      row.q = estimate_q(inst, good);
      q_inst += inst;
      q_good += good;
    }
    if (opt.track_bound) row.bound = stage_bound(view);

    std::vector<TransferDirective> dirs;
    switch (cfg.scheduler) {
      case Scheduler::random_fifo: dirs = schedule_random_fifo(view, sched_seed); break;
      case Scheduler::random_ff: dirs = schedule_random_fastest_first(view, sched_seed); break;
      case Scheduler::greedy_ff: dirs = schedule_greedy_fastest_first(view, sched_seed); break;
      case Scheduler::flooding: dirs = schedule_flooding(view, sched_seed, flood); break;
      case Scheduler::distributed: dirs = schedule_distributed(view, sched_seed); break;
      case Scheduler::maxflow: dirs = schedule_maxflow(view); break;
    }
    dirs.insert(dirs.end(), pending.begin(), pending.end());
    const auto crossed = ws.crossed_threshold;
    auto res = step(s, std::move(dirs));
    pending = std::move(res.deferred);
    row.carried = res.carried;
    row.delivered = static_cast<std::int64_t>(res.executed.size()) - res.carried;

    for (const auto& d : res.executed) {
      if (d.flags & kEmergency) {
        ++rep.emergency_transfers;
        continue;
      }
      const NodeId v = d.sender;
      if (byz[v] || !crossed[v]) continue;
      ++rep.post_threshold_transfers;
      rep.post_threshold_owner += u.owner_of(d.chunk) == v;
      cap_sum += cap[v];
      ++pair_obs[{v, d.receiver}];
      if (b_stage[v] != row.stage) {
        b_stage[v] = row.stage;
        b_size[v] = view.eligible[v].count();
        o_stage[v] = owner_bits(view.eligible[v], u, v);
        b_min[v] = std::min<std::int64_t>(b_min[v], b_size[v]);
        o_max[v] = std::max<std::int64_t>(o_max[v], o_stage[v]);
        if (b_size[v] > 0)
          rep.buffer_fraction_ratio =
              std::max(rep.buffer_fraction_ratio, static_cast<double>(o_stage[v]) / b_size[v] / cap[v]);
      }
    }
    ws.note_executed(s, res.executed);
    ws.update_threshold(s);
    arm = res.executed.empty();

    int active = 0, reached = 0;
    for (NodeId v = 0; v < n; ++v)
      if (s.active[v]) {
        ++active;
        reached += s.inv[v].count >= kb;
      }
    rep.k_achievement.push_back({s.slot, active ? static_cast<double>(reached) / active : 1.0});
    rep.stages.push_back(row);
    decision = warmup_complete(s, kb, cfg.s_max);
  }
  rep.fail_open = decision == WarmupDecision::fail_open;
  if (rep.fail_open) rep.warnings.push_back("warm-up deadline reached: failed open, unlinkability void for this round");
  rep.warmup_slots = s.slot;
  rep.emergency_releases = ws.emergency_releases;
  rep.owner_cap_mean = rep.post_threshold_transfers ? cap_sum / rep.post_threshold_transfers : 0.0;

  // Non-owner mass at the end of warm-up, and the share a coalition could filter.
  double x_sum = 0, rho_sum = 0;
  int honest = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (is_member[v] || !s.active[v]) continue;
    int x = 0, from_c = 0;
    s.inv[v].held.for_each([&](int c) {
      const NodeId o = u.owner_of(c);
      if (o == v) return;
      ++x;
      from_c += is_member[o];
    });
    x_sum += x;
    rho_sum += x ? static_cast<double>(from_c) / x : 0.0;
    ++honest;
  }

  if (cfg.bt_phase) {
    s.phase = Phase::bittorrent;
    BtScheduler bt(g, s, cfg.tau);
    const int limit = s.slot + cfg.bt_max_slots;
    int idle = 0;
    while (!disseminated(s) && s.slot < limit && idle < 50) {
      auto dirs = bt.plan(s, derive_seed(cfg.seed, {0xb7, static_cast<std::uint64_t>(s.slot)}));
      std::vector<int> up(n), down(n);
      reserve_pending(pending, s, up, down);
      dirs.insert(dirs.end(), pending.begin(), pending.end());
      auto res = step(s, std::move(dirs));
      pending = std::move(res.deferred);
      bt.update(s, res.executed);
      idle = res.executed.empty() ? idle + 1 : 0;
    }
  }
  rep.disseminated = disseminated(s);
  rep.round_slots = s.slot;
  rep.warmup_seconds = rep.warmup_slots * cfg.slot_seconds;
  rep.round_seconds = rep.round_slots * cfg.slot_seconds;
  rep.warmup_share = rep.round_slots ? static_cast<double>(rep.warmup_slots) / rep.round_slots : 0.0;
  rep.utilization = utilization(s, rep.warmup_slots);
  rep.round_utilization = utilization(s, rep.round_slots);

  if (opt.aggregate) {
    const auto updates = synthetic_updates(n, cfg.vector_len, derive_seed(cfg.seed, {0xa99}));
    std::map<std::vector<NodeId>, std::string> seen;
    for (NodeId v = 0; v < n; ++v) {
      if (!s.active[v]) continue;
      try {
        const auto A = reconstructable_set(v, s);
        const auto cs = checksum(fedavg(updates, A));
        rep.aggregation.push_back({v, static_cast<int>(A.size()), cs});
        const auto [it, fresh] = seen.emplace(A, cs);
        if (!fresh && it->second != cs) rep.aggregation_agree = false;
      } catch (const std::exception& e) {
        rep.warnings.push_back(e.what());
      }
    }
  }

  run.log = make_round_log(cfg, u, s.log);
  if (opt.audit) rep.audit = verify_round_log(commit_seed(cfg.seed), cfg.seed, run.log, cfg);

  if (!opt.attacks.empty()) {
    const auto truth = ground_truth(s);
    const auto all = split_by_observer(s.observations, n, {true, true});
    const auto early = split_by_observer(s.observations, n, {true, false});
    std::unordered_set<std::uint64_t> member_ps;
    for (NodeId v : members) member_ps.insert(s.round_pseudonym[v]);
    for (Attack a : opt.attacks) {
      for (int scope = 0; scope < 2; ++scope) {
        const auto& obs = scope ? early : all;
        std::vector<AttackOutput> outs;
        for (NodeId v = 0; v < n; ++v)
          if (!obs[v].empty()) outs.push_back(run_attack(a, obs[v]));
        const auto sum = asr(outs, truth, n);
        rep.asr.push_back({a, scope == 1, sum.max, sum.mean, sum.receivers});
      }
      if (!members.empty()) {
        const Coalition c{members, cfg.phi, derive_seed(cfg.seed, {0xf1})};
        const auto r = collude(a, all, c, member_ps, truth);
        rep.collusion.push_back({a, static_cast<int>(members.size()), cfg.phi, r.per_attacker, r.any_succeeds, r.pooled});
      }
    }
  }

  BoundsRow& b = rep.bounds;
  BoundInputs in;
  in.kappa = cfg.kappa;
  in.k_beta = kb;
  in.K = static_cast<std::int64_t>(std::llround(static_cast<double>(u.total()) / n));
  in.mu = static_cast<double>(rep.spray_chunks) / n;
  in.m = g.avg_degree();
  in.T_lag = cfg.T_lag;
  in.q = q_inst ? static_cast<double>(q_good) / q_inst : 0.0;
  in.eps = cfg.eps;
  in.phi = members.empty() ? 0.0 : cfg.phi;
  in.rho = honest ? rho_sum / honest : 0.0;
  in.X = honest ? x_sum / honest : 0.0;
  NodeId worst = -1;
  std::int64_t s_max_pair = 0;
  for (const auto& [key, cnt] : pair_obs)
    if (cnt > s_max_pair) {
      s_max_pair = cnt;
      worst = key.first;
    }
  if (worst >= 0) {
    in.B_star = b_min[worst];
    in.O_star = std::min(o_max[worst], in.B_star);
    in.s = std::min(s_max_pair, in.B_star);
  } else {
    in.s = 0;
  }
  b.kappa = in.kappa;
  b.k_beta = kb;
  b.K = in.K;
  b.h = in.h();
  b.mu = in.mu;
  b.m = in.m;
  b.T_lag = in.T_lag;
  b.q = in.q;
  b.eps = in.eps;
  b.per_transfer = per_transfer_bound(in.kappa, kb, in.K);
  const auto mix = mixing_bound(in);
  b.mixing = mix.bound;
  b.eta = mix.eta;
  b.multi_obs_exact = in.B_star > 0 ? multi_obs_exact(in.B_star, in.O_star, in.s) : 0.0;
  b.multi_obs_union = multi_obs_union(in.kappa, in.h(), in.s);
  b.phi = in.phi;
  b.rho = in.rho;
  const auto cb = collusion_bounds(in);
  b.coalition = cb.af;
  b.coalition_mixing = cb.af_mixing.bound;
  b.coalition_multi = cb.af_multi;
  b.s = in.s;
  b.B_star = in.B_star;
  b.O_star = in.O_star;
  return run;
}

MetricsReport run_experiment(const RoundConfig& cfg, const RunOptions& opt) { return run_round(cfg, opt).report; }

std::vector<std::uint64_t> replicate_seeds(std::uint64_t base, int replicates) {
  std::vector<std::uint64_t> out;
  for (int r = 0; r < replicates; ++r) out.push_back(base + static_cast<std::uint64_t>(r));
  return out;
}

std::vector<MetricsReport> run_sweep(const RoundConfig& base, const std::string& axis, const std::vector<std::string>& values,
                                     int replicates, const RunOptions& opt, int jobs) {
  std::vector<RoundConfig> cfgs;
  const auto seeds = replicate_seeds(base.seed, replicates);
  for (const auto& v : values)
    for (auto sd : seeds) {
      RoundConfig c = base;
      set_field(c, axis, v);
      c.seed = sd;
      validate(c);
      cfgs.push_back(c);
    }
  std::vector<MetricsReport> out(cfgs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < cfgs.size();) {
      try {
        out[i] = run_experiment(cfgs[i], opt);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(cfgs.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string observations_csv(const std::vector<ObservationRecord>& obs) {
  std::string out = "slot,observer,sender_pseudonym,chunk_owner,chunk_index,phase\n";
  out.reserve(out.size() + obs.size() * 40);
  auto put = [&out](auto v, char sep) {
    char buf[24];
    out.append(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
    out += sep;
  };
  for (const auto& r : obs) {
    put(r.slot, ',');
    put(r.observer, ',');
    // fixed-width hex so pseudonyms sort and diff cleanly
    char hex[16];
    const auto w = std::to_chars(hex, hex + sizeof hex, r.sender_pseudonym, 16).ptr - hex;
    out.append(static_cast<std::size_t>(16 - w), '0');
    out.append(hex, static_cast<std::size_t>(w));
    out += ',';
    put(r.chunk.owner, ',');
    put(r.chunk.index, ',');
    out += to_string(r.phase);
    out += '\n';
  }
  return out;
}

std::string observations_csv(const SimState& s) { return observations_csv(s.observations); }

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& p, const std::string& header) : path_(p), os_(p) {
    if (!os_) throw std::runtime_error("cannot write " + p.string());
    os_ << header << '\n';
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(v), first = false), ...);
    os_ << '\n';
  }
  ~CsvFile() noexcept(false) {
    os_.flush();
    if (!os_ && std::uncaught_exceptions() == 0) throw std::runtime_error("write failed for " + path_.string());
  }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I i) {
    return std::to_string(i);
  }
  std::filesystem::path path_;
  std::ofstream os_;
};

}  // namespace

void emit_report(const std::vector<MetricsReport>& reports, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  const fs::path d(dir);
  {
    CsvFile f(d / "metrics.csv",
              "seed,n,m,beta,R,T_lag,scheduler,k_beta,warmup_slots,round_slots,warmup_seconds,round_seconds,warmup_share,"
              "utilization,round_utilization,emergency_releases,fail_open,disseminated,owner_fraction,owner_cap,audit");
    for (const auto& r : reports) {
      const auto& c = r.config;
      f.row(c.seed, c.n, c.m, c.beta, c.R, c.T_lag, std::string(to_string(c.scheduler)), r.k_beta, r.warmup_slots,
            r.round_slots, r.warmup_seconds, r.round_seconds, r.warmup_share, r.utilization, r.round_utilization,
            r.emergency_releases, r.fail_open, r.disseminated, r.owner_fraction(), r.owner_cap_mean,
            r.audit ? (r.audit->accept ? std::string("accept") : "reject:" + r.audit->reason) : std::string("skipped"));
    }
  }
  {
    CsvFile f(d / "warmup.csv", "seed,n,m,beta,R,T_lag,warmup_slots,emergency_releases,spray_chunks");
    for (const auto& r : reports) {
      const auto& c = r.config;
      f.row(c.seed, c.n, c.m, c.beta, c.R, c.T_lag, r.warmup_slots, r.emergency_releases, r.spray_chunks);
    }
  }
  for (int scope = 0; scope < 2; ++scope) {
    CsvFile f(d / (scope ? "asr_warmup.csv" : "asr.csv"), "seed,attack,defenses,n,m,beta,R,attackers,phi,asr_max,asr_mean");
    for (const auto& r : reports) {
      const auto& c = r.config;
      const auto label = defenses_label(c);
      for (const auto& a : r.asr)
        if (a.warmup_only == (scope == 1))
          f.row(c.seed, std::string(to_string(a.attack)), label, c.n, c.m, c.beta, c.R, c.attackers, c.phi, a.max, a.mean);
    }
  }
  {
    CsvFile f(d / "collusion.csv", "seed,attack,attackers,phi,per_attacker,any_succeeds,pooled");
    for (const auto& r : reports)
      for (const auto& a : r.collusion)
        f.row(r.config.seed, std::string(to_string(a.attack)), a.attackers, a.phi, a.per_attacker, a.any_succeeds, a.pooled);
  }
  {
    CsvFile f(d / "bounds.csv", "kappa,k_beta,K,h,mu,m,T_lag,q,eps,per_transfer,mixing,eta,multi_obs_exact,multi_obs_union,phi,rho,coalition,coalition_mixing,coalition_multi");
    for (const auto& r : reports) {
      const auto& b = r.bounds;
      f.row(b.kappa, b.k_beta, b.K, b.h, b.mu, b.m, b.T_lag, b.q, b.eps, b.per_transfer, b.mixing, b.eta, b.multi_obs_exact, b.multi_obs_union, b.phi,
            b.rho, b.coalition, b.coalition_mixing, b.coalition_multi);
    }
  }
  {
    CsvFile f(d / "kcurve.csv", "seed,slot,ratio");
    for (const auto& r : reports)
      for (const auto& [slot, ratio] : r.k_achievement) f.row(r.config.seed, slot, ratio);
  }
  {
    CsvFile f(d / "stages.csv", "seed,stage,delivered,carried,bound,q");
    for (const auto& r : reports)
      for (const auto& st : r.stages)
        f.row(r.config.seed, st.stage, st.delivered, st.carried, st.bound, st.q ? format_double(*st.q) : std::string());
  }
  for (std::size_t i = 0; i < std::max<std::size_t>(1, reports.size()); ++i) {
    const auto name = reports.size() <= 1 ? std::string("aggregation.csv") : "aggregation_" + std::to_string(i) + ".csv";
    CsvFile f(d / name, "node,reconstructable_count,aggregate_checksum");
    if (i < reports.size())
      for (const auto& a : reports[i].aggregation) f.row(a.node, a.reconstructable, a.checksum);
  }
  std::ofstream sum(d / "summary.txt");
  if (!sum) throw std::runtime_error("cannot write " + (d / "summary.txt").string());
  for (const auto& r : reports) {
    const auto& c = r.config;
    sum << "seed " << c.seed << "  n=" << c.n << " m=" << c.m << " beta=" << c.beta << " R=" << c.R << " T_lag=" << c.T_lag
        << " scheduler=" << to_string(c.scheduler) << " defenses=" << defenses_label(c) << '\n'
        << "  warm-up " << r.warmup_slots << " slots (" << r.warmup_seconds << " s), round " << r.round_slots << " slots ("
        << r.round_seconds << " s), share " << r.warmup_share << '\n'
        << "  utilization warm-up " << r.utilization << ", round " << r.round_utilization << '\n'
        << "  spray chunks " << r.spray_chunks << ", emergency releases " << r.emergency_releases
        << (r.fail_open ? ", FAILED OPEN" : "") << '\n'
        << "  owner fraction after threshold " << r.owner_fraction() << " over " << r.post_threshold_transfers
        << " transfers (cap " << r.owner_cap_mean << ")\n";
    for (const auto& a : r.asr)
      sum << "  asr " << to_string(a.attack) << (a.warmup_only ? " (warm-up only)" : "") << ": max " << a.max << " mean "
          << a.mean << '\n';
    for (const auto& a : r.collusion)
      sum << "  coalition of " << a.attackers << " " << to_string(a.attack) << ": per-attacker " << a.per_attacker
          << " any " << a.any_succeeds << " pooled " << a.pooled << '\n';
    if (r.audit) sum << "  audit " << (r.audit->accept ? "accept" : "reject (" + r.audit->reason + ") " + r.audit->detail) << '\n';
    for (const auto& w : r.warnings) sum << "  warning: " << w << '\n';
  }
  if (!sum) throw std::runtime_error("write failed for " + (d / "summary.txt").string());
}

}  // namespace fltorrent
