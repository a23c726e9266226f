#include "fltorrent/warmup.hpp"

#include <algorithm>

#include "fltorrent/rng.hpp"

namespace fltorrent {

SprayPlan preround_spray(const Overlay& g, const ChunkUniverse& u, double R, std::uint64_t seed) {
  if (!(R >= 0 && R < 1)) throw std::domain_error("R must be in [0, 1)");
  SprayPlan plan;
  Rng rng(derive_seed(seed, {0x5b4a7}));
  std::vector<NodeId> others;
  std::vector<ChunkIndex> own;
  for (NodeId v = 0; v < g.n(); ++v) {
    const int sigma = static_cast<int>(R * u.K(v) + 1e-9);
    if (sigma == 0) continue;
    others.clear();
    for (NodeId w = 0; w < g.n(); ++w)
      if (w != v && !g.adjacent(v, w)) others.push_back(w);
    if (others.empty()) {
      plan.warnings.push_back("node " + std::to_string(v) + " is adjacent to every peer; spray skipped");
      continue;
    }
    own.clear();
    for (ChunkIndex c = u.begin(v); c < u.end(v); ++c) own.push_back(c);
    // Partial Fisher-Yates: the first sigma entries are a uniform sample.
    for (int i = 0; i < sigma; ++i) {
      std::size_t j = i + rng.below(own.size() - i);
      std::swap(own[i], own[j]);
    }
    for (int i = 0; i < sigma; ++i)
      plan.directives.push_back({-1, v, others[rng.below(others.size())], own[i], kSpray});
  }
  return plan;
}

std::vector<int> sample_lags(int n, int T_lag, std::uint64_t seed) {
  if (T_lag < 1) throw std::domain_error("T_lag must be at least 1");
  Rng rng(derive_seed(seed, {0x1a95}));
  std::vector<int> lags(n);
  for (auto& l : lags) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(T_lag)));
  return lags;
}

void WarmupState::init(const SimState& s, std::int64_t kb, int kap, std::vector<int> l) {
  lags = std::move(l);
  k_beta = kb;
  kappa = kap;
  const int n = s.n();
  crossed_threshold.assign(n, 0);
  owner_sent.resize(n);
  for (NodeId v = 0; v < n; ++v) owner_sent[v].assign(s.universe.K(v), 0);
  owner_rotation.assign(n, 0);
  emergency.assign(n, 0);
  emergency_releases = 0;
  update_threshold(s);
}

void WarmupState::update_threshold(const SimState& s) {
  for (NodeId v = 0; v < s.n(); ++v) crossed_threshold[v] = s.inv[v].count >= k_beta;
}

void WarmupState::note_executed(const SimState& s, const std::vector<TransferDirective>& executed) {
  for (const auto& d : executed) {
    if (d.flags & kSpray) continue;
    const auto& inv = s.inv[d.sender];
    if (inv.owns(d.chunk)) {
      owner_sent[d.sender][d.chunk - inv.owner_begin] = 1;
      if (d.flags & kEmergency) ++emergency_releases;
    }
  }
  for (NodeId v = 0; v < s.n(); ++v) {
    const auto& sent = owner_sent[v];
    if (!sent.empty() && std::all_of(sent.begin(), sent.end(), [](auto x) { return x != 0; }))
      owner_rotation[v] = (owner_rotation[v] + kappa) % static_cast<int>(sent.size());
  }
}

std::vector<ChunkIndex> offered_owner_chunks(NodeId v, const Inventory& inv, const WarmupState& ws) {
  std::vector<ChunkIndex> out;
  if (!(inv.count >= ws.k_beta || ws.emergency[v])) return out;
  const auto& sent = ws.owner_sent[v];
  const int K = static_cast<int>(sent.size());
  for (int i = 0; i < K && static_cast<int>(out.size()) < ws.kappa; ++i)
    if (!sent[i]) out.push_back(inv.owner_begin + i);
  for (int j = 0; j < K && static_cast<int>(out.size()) < ws.kappa; ++j) {
    const ChunkIndex c = inv.owner_begin + (ws.owner_rotation[v] + j) % K;
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

Bitset eligible_buffer(NodeId v, const Inventory& inv, const WarmupState& ws) {
  Bitset b = inv.held;
  for (ChunkIndex c = inv.owner_begin; c < inv.owner_end; ++c) b.reset(c);
  for (ChunkIndex c : offered_owner_chunks(v, inv, ws)) b.set(c);
  return b;
}

const char* to_string(WarmupDecision d) {
  switch (d) {
    case WarmupDecision::continue_warmup: return "continue";
    case WarmupDecision::switch_to_bt: return "switch_to_bt";
    case WarmupDecision::fail_open: return "fail_open";
  }
  return "?";
}

WarmupDecision warmup_complete(const SimState& s, std::int64_t k_beta, int s_max) {
  bool done = true;
  for (NodeId v = 0; v < s.n() && done; ++v)
    if (s.active[v] && s.inv[v].count < k_beta) done = false;
  if (done) return WarmupDecision::switch_to_bt;
  if (s.slot >= s_max) return WarmupDecision::fail_open;
  return WarmupDecision::continue_warmup;
}

}  // namespace fltorrent
