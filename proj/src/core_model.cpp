#include "fltorrent/types.hpp"

#include <cmath>
#include <cstdio>

#include "fltorrent/rng.hpp"

namespace fltorrent {

std::uint64_t pseudonym_token(const Pseudonym& p, std::uint64_t salt) {
  return derive_seed(salt, {static_cast<std::uint64_t>(p.node), static_cast<std::uint64_t>(p.round),
                            static_cast<std::uint64_t>(p.kind), p.serial});
}

ChunkUniverse::ChunkUniverse(const std::vector<int>& per_owner, int round) : round_(round) {
  offsets_.assign(per_owner.size() + 1, 0);
  for (std::size_t v = 0; v < per_owner.size(); ++v) offsets_[v + 1] = offsets_[v] + per_owner[v];
  owner_.resize(offsets_.back());
  for (std::size_t v = 0; v < per_owner.size(); ++v)
    for (int c = offsets_[v]; c < offsets_[v + 1]; ++c) owner_[c] = static_cast<NodeId>(v);
}

int Inventory::owner_held() const {
  int c = 0;
  for (ChunkIndex i = owner_begin; i < owner_end; ++i) c += held.test(i);
  return c;
}

Bitset Inventory::owner_mask() const {
  Bitset b(held.size());
  for (ChunkIndex i = owner_begin; i < owner_end; ++i) b.set(i);
  return b;
}

const char* to_string(Scheduler s) {
  switch (s) {
    case Scheduler::random_fifo: return "random_fifo";
    case Scheduler::random_ff: return "random_ff";
    case Scheduler::greedy_ff: return "greedy_ff";
    case Scheduler::flooding: return "flooding";
    case Scheduler::distributed: return "distributed";
    case Scheduler::maxflow: return "maxflow";
  }
  return "?";
}

Scheduler parse_scheduler(const std::string& s) {
  for (auto k : {Scheduler::random_fifo, Scheduler::random_ff, Scheduler::greedy_ff, Scheduler::flooding,
                 Scheduler::distributed, Scheduler::maxflow})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown scheduler '" + s + "'");
}

std::int64_t compute_k_beta(double beta, std::int64_t total_chunks) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("beta must be in (0, 1]");
  if (total_chunks < 1) throw std::domain_error("chunk universe is empty");
  // Guard against 0.1 * 500 = 50.000000000000007 style representation noise.
  const long double x = static_cast<long double>(beta) * static_cast<long double>(total_chunks);
  auto k = static_cast<std::int64_t>(std::ceil(x - 1e-9L));
  if (k < 1) k = 1;
  if (k > total_chunks) k = total_chunks;
  return k;
}

int chunks_per_slot(double rate_bps, double slot_s, int chunk_bytes) {
  if (!(rate_bps > 0 && slot_s > 0 && chunk_bytes > 0)) throw std::domain_error("rates, slot and chunk size must be positive");
  const long double x = static_cast<long double>(rate_bps) * slot_s / (8.0L * chunk_bytes);
  return static_cast<int>(std::floor(x + 1e-9L));
}

std::int64_t required_nonowner_mass(std::int64_t k_beta, std::int64_t K_v) {
  return k_beta > K_v ? k_beta - K_v : 0;
}

std::vector<int> chunk_counts(const RoundConfig& cfg) {
  std::vector<int> k(cfg.n, cfg.K);
  if (cfg.heterogeneous_K) {
    Rng rng(derive_seed(cfg.seed, {0x4b}));
    for (auto& x : k) x = static_cast<int>(rng.between(cfg.K_min, cfg.K_max));
  }
  return k;
}

void validate(const RoundConfig& cfg) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  need(cfg.n >= 2, "n must be at least 2");
  need(cfg.m >= 1, "m must be positive");
  need(cfg.n > cfg.m, "n must exceed m");
  need(cfg.K >= 1, "K must be positive");
  need(cfg.chunk_bytes > 0, "chunk_bytes must be positive");
  need(cfg.slot_seconds > 0, "slot_seconds must be positive");
  need(cfg.s_max >= 1, "s_max must be positive");
  need(cfg.beta > 0 && cfg.beta <= 1, "beta must be in (0, 1]");
  need(cfg.R >= 0 && cfg.R < 1, "R must be in [0, 1)");
  need(cfg.T_lag >= 1, "T_lag must be at least 1");
  need(cfg.kappa >= 1, "kappa must be at least 1");
  need(cfg.tau >= 1, "tau must be at least 1");
  need(cfg.uplink_mbps_min > 0 && cfg.uplink_mbps_max >= cfg.uplink_mbps_min, "bad uplink range");
  need(cfg.downlink_mbps_min > 0 && cfg.downlink_mbps_max >= cfg.downlink_mbps_min, "bad downlink range");
  need(cfg.vector_len >= 1, "vector_len must be positive");
  need(cfg.eps > 0 && cfg.eps < 1, "eps must be in (0, 1)");
  need(cfg.phi >= 0 && cfg.phi <= 1, "phi must be in [0, 1]");
  need(cfg.attackers >= 0 && cfg.attackers <= cfg.n, "attackers must be in [0, n]");
  if (cfg.heterogeneous_K) need(cfg.K_min >= 1 && cfg.K_max >= cfg.K_min, "bad K_min/K_max");
  for (auto& b : cfg.fault_spec.byz_nodes) {
    need(b.node >= 0 && b.node < cfg.n, "byzantine node out of range");
    need(b.prob >= 0 && b.prob <= 1, "byzantine probability must be in [0, 1]");
    need(b.delay_slots >= 0, "delay must be non-negative");
  }
  for (auto& d : cfg.fault_spec.dropouts) need(d.node >= 0 && d.node < cfg.n && d.slot >= 0, "bad dropout");
  need(cfg.fault_spec.progress_timeout >= 0, "progress_timeout must be non-negative");

  std::int64_t total = 0;
  for (int k : chunk_counts(cfg)) total += k;
  need(compute_k_beta(cfg.beta, total) <= total, "k_beta exceeds the chunk universe");
  const double up_bps = cfg.uplink_mbps_min * 1e6;
  need(chunks_per_slot(up_bps, cfg.slot_seconds, cfg.chunk_bytes) >= 1, "uplink below one chunk per slot");
}

std::vector<Capacities> sample_capacities(const RoundConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, {0xca9}));
  std::vector<Capacities> caps(cfg.n);
  for (auto& c : caps) {
    c.uplink_bps = 1e6 * (cfg.uplink_mbps_min + (cfg.uplink_mbps_max - cfg.uplink_mbps_min) * rng.uniform());
    c.downlink_bps = 1e6 * (cfg.downlink_mbps_min + (cfg.downlink_mbps_max - cfg.downlink_mbps_min) * rng.uniform());
    c.up_chunks = chunks_per_slot(c.uplink_bps, cfg.slot_seconds, cfg.chunk_bytes);
    c.down_chunks = chunks_per_slot(c.downlink_bps, cfg.slot_seconds, cfg.chunk_bytes);
  }
  return caps;
}

}  // namespace fltorrent
