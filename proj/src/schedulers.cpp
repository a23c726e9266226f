#include "fltorrent/schedulers.hpp"

#include <algorithm>

#include "bitops.hpp"

namespace fltorrent {

using detail::RequestPool;

StageView make_stage_view(const SimState& s, const Overlay& g, const WarmupState& ws, int tau, bool nof, Rng* lie_rng) {
  StageView v;
  const int n = s.n();
  v.overlay = &g;
  v.universe = &s.universe;
  v.tau = tau;
  v.kappa = ws.kappa;
  v.non_owner_first = nof;
  v.stage = s.slot;
  v.res_up = s.residual_up;
  v.res_down = s.residual_down;
  v.participating.assign(n, 0);
  v.emergency.assign(n, 0);
  v.held.reserve(n);
  v.eligible.resize(n);
  for (NodeId u = 0; u < n; ++u) {
    Bitset h = s.inv[u].held;
    const int bi = s.byz_index[u];
    if (bi >= 0 && lie_rng && s.faults.byz_nodes[bi].behavior == ByzBehavior::lie_bitfield) {
      const double p = s.faults.byz_nodes[bi].prob;
      for (int c = 0; c < h.size(); ++c)
        if (!h.test(c) && lie_rng->bernoulli(p)) h.set(c);
    }
    v.held.push_back(std::move(h));
  }
  for (NodeId u = 0; u < n; ++u) {
    v.participating[u] = s.active[u] && ws.started(u, s.slot);
    if (!v.participating[u]) {
      v.res_up[u] = 0;
      v.res_down[u] = 0;
      v.eligible[u] = Bitset(s.universe.total());
      continue;
    }
    const auto& inv = s.inv[u];
    Bitset e = v.held[u];
    detail::clear_range(e, inv.owner_begin, inv.owner_end);
    for (ChunkIndex c : offered_owner_chunks(u, inv, ws)) e.set(c);
    v.emergency[u] = ws.emergency[u] && inv.count < ws.k_beta;
    v.eligible[u] = std::move(e);
  }
  return v;
}

Bitset missing_set(NodeId v, const StageView& view) {
  Bitset m(view.universe->total());
  for (NodeId u : view.overlay->neighbors(v))
    if (view.participating[u]) detail::or_into(m, view.held[u]);
  detail::andnot_into(m, view.held[v]);
  return m;
}

Bitset requestable_set(NodeId v, const StageView& view) {
  Bitset m(view.universe->total());
  for (NodeId u : view.overlay->neighbors(v))
    if (view.participating[u]) detail::or_into(m, view.eligible[u]);
  detail::andnot_into(m, view.held[v]);
  return m;
}

std::vector<NodeId> non_owner_first(const std::vector<NodeId>& candidates, ChunkIndex chunk, const ChunkUniverse& u) {
  std::vector<NodeId> out(candidates);
  const NodeId owner = u.owner_of(chunk);
  std::stable_partition(out.begin(), out.end(), [&](NodeId x) { return x != owner; });
  return out;
}

namespace {

// Per-stage bookkeeping shared by the centralized heuristics.
class Planner {
 public:
  explicit Planner(const StageView& v)
      : v_(v), up_(v.res_up), down_(v.res_down), assigned_(v.n(), 0), recv_(v.n()), emerg_(v.n(), v.kappa), avail_(v.n(), 0) {
    for (NodeId w = 0; w < v.n(); ++w) {
      if (!v.participating[w]) continue;
      for (NodeId u : v.overlay->neighbors(w))
        if (v.participating[u] && up_[u] > 0) ++avail_[w];
    }
    for (NodeId u = 0; u < v.n(); ++u) open_ += v.participating[u] && up_[u] > 0;
  }

  bool has_recv(NodeId u, NodeId w) const {
    return std::find(recv_[u].begin(), recv_[u].end(), w) != recv_[u].end();
  }

  bool is_emergency(NodeId u, ChunkIndex c) const { return v_.emergency[u] && v_.owner(c) == u; }

  bool can_serve(NodeId u, NodeId w, ChunkIndex c) const {
    if (up_[u] <= 0 || down_[w] <= 0) return false;
    if (static_cast<int>(recv_[u].size()) >= v_.tau && !has_recv(u, w)) return false;
    if (is_emergency(u, c) && emerg_[u] <= 0) return false;
    return true;
  }

  void commit(NodeId u, NodeId w, ChunkIndex c) {
    std::uint8_t flags = kScheduled;
    if (is_emergency(u, c)) {
      --emerg_[u];
      flags |= kEmergency;
    }
    out_.push_back({v_.stage, u, w, c, flags});
    ++assigned_[u];
    --down_[w];
    // avail_ counts, per receiver, neighbors that could still serve it.
    bool newly_full = false;
    if (!has_recv(u, w)) {
      recv_[u].push_back(w);
      newly_full = static_cast<int>(recv_[u].size()) == v_.tau;
    }
    const bool full = static_cast<int>(recv_[u].size()) >= v_.tau;
    if (--up_[u] == 0) {
      --open_;
      for (NodeId x : v_.overlay->neighbors(u))
        if (newly_full || !full || has_recv(u, x)) --avail_[x];
    } else if (newly_full) {
      for (NodeId x : v_.overlay->neighbors(u))
        if (!has_recv(u, x)) --avail_[x];
    }
  }

  // Participating neighbors of w holding c in their eligible buffer.
  void holders(NodeId w, ChunkIndex c, std::vector<NodeId>& out) const {
    out.clear();
    for (NodeId u : v_.overlay->neighbors(w))
      if (v_.participating[u] && v_.eligible[u].test(c)) out.push_back(u);
  }

  // When non-owner-first is on and a non-owner is present, drop the owner.
  void prefer_relays(std::vector<NodeId>& hs, ChunkIndex c) const {
    if (!v_.non_owner_first || hs.size() < 2) return;
    const NodeId owner = v_.owner(c);
    auto it = std::find(hs.begin(), hs.end(), owner);
    if (it != hs.end()) hs.erase(it);
  }

  bool receiver_done(NodeId w) const { return down_[w] <= 0 || avail_[w] <= 0; }
  bool all_senders_closed() const { return open_ <= 0; }

  int up(NodeId u) const { return up_[u]; }
  int down(NodeId w) const { return down_[w]; }
  int assigned(NodeId u) const { return assigned_[u]; }
  std::vector<TransferDirective> take() { return std::move(out_); }

 private:
  const StageView& v_;
  std::vector<int> up_, down_, assigned_;
  std::vector<std::vector<NodeId>> recv_;
  std::vector<int> emerg_;
  std::vector<int> avail_;
  int open_ = 0;
  std::vector<TransferDirective> out_;
};

RequestPool make_pool(const StageView& v) {
  std::vector<Bitset> sets(v.n());
  for (NodeId w = 0; w < v.n(); ++w)
    sets[w] = (v.participating[w] && v.res_down[w] > 0) ? requestable_set(w, v) : Bitset(v.universe->total());
  return RequestPool(std::move(sets));
}

}  // namespace

std::vector<TransferDirective> schedule_random_fifo(const StageView& v, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0xf1f0, static_cast<std::uint64_t>(v.stage)}));
  Planner p(v);
  RequestPool pool = make_pool(v);
  std::vector<NodeId> hs;
  NodeId w;
  ChunkIndex c;
  while (!p.all_senders_closed() && pool.draw(rng, w, c)) {
    if (p.receiver_done(w)) {
      pool.retire(w);
      continue;
    }
    p.holders(w, c, hs);
    p.prefer_relays(hs, c);
    if (hs.empty()) continue;
    const NodeId u = hs[rng.below(hs.size())];
    if (p.can_serve(u, w, c)) p.commit(u, w, c);
    if (p.receiver_done(w)) pool.retire(w);
  }
  return p.take();
}

std::vector<TransferDirective> schedule_greedy_fastest_first(const StageView& v, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x6ff, static_cast<std::uint64_t>(v.stage)}));
  Planner p(v);
  RequestPool pool = make_pool(v);
  std::vector<NodeId> hs;
  NodeId w;
  ChunkIndex c;
  while (!p.all_senders_closed() && pool.draw(rng, w, c)) {
    if (p.receiver_done(w)) {
      pool.retire(w);
      continue;
    }
    p.holders(w, c, hs);
    std::erase_if(hs, [&](NodeId u) { return !p.can_serve(u, w, c); });
    p.prefer_relays(hs, c);
    if (hs.empty()) continue;
    NodeId best = hs[0];
    auto score = [&](NodeId u) { return std::min(p.up(u), p.down(w)); };
    for (std::size_t i = 1; i < hs.size(); ++i) {
      const NodeId u = hs[i];
      const int a = score(u), b = score(best);
      if (a > b || (a == b && (p.assigned(u) < p.assigned(best) || (p.assigned(u) == p.assigned(best) && u < best))))
        best = u;
    }
    p.commit(best, w, c);
    if (p.receiver_done(w)) pool.retire(w);
  }
  return p.take();
}

std::vector<TransferDirective> schedule_random_fastest_first(const StageView& v, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x7ff, static_cast<std::uint64_t>(v.stage)}));
  const int n = v.n();
  const auto& g = *v.overlay;
  // queue[u][slot of w in N(u)] holds w's requests assigned to u, in arrival order.
  std::vector<std::vector<std::vector<ChunkIndex>>> queue(n);
  std::vector<std::vector<std::uint64_t>> tie(n);
  for (NodeId u = 0; u < n; ++u) {
    queue[u].resize(g.degree(u));
    tie[u].resize(g.degree(u));
    for (auto& t : tie[u]) t = rng.next();
  }
  auto slot_of = [&](NodeId u, NodeId w) {
    const auto& a = g.neighbors(u);
    return static_cast<int>(std::lower_bound(a.begin(), a.end(), w) - a.begin());
  };

  std::vector<NodeId> hs;
  for (NodeId w = 0; w < n; ++w) {
    if (!v.participating[w] || v.res_down[w] <= 0) continue;
    // Neighbors whose queue for w can still grow; once all are full, later
    // arrivals from w would sit behind them and never be served.
    int open = 0;
    for (NodeId u : g.neighbors(w)) open += v.participating[u] && v.res_up[u] > 0;
    RequestPool pool(std::vector<Bitset>{requestable_set(w, v)});
    NodeId dummy;
    ChunkIndex c;
    while (open > 0 && pool.draw(rng, dummy, c)) {
      hs.clear();
      for (NodeId u : g.neighbors(w))
        if (v.participating[u] && v.eligible[u].test(c)) hs.push_back(u);
      if (v.non_owner_first && hs.size() > 1) std::erase(hs, v.owner(c));
      if (hs.empty()) continue;
      const NodeId u = hs[rng.below(hs.size())];
      auto& q = queue[u][slot_of(u, w)];
      if (static_cast<int>(q.size()) < v.res_up[u]) {
        q.push_back(c);
        if (static_cast<int>(q.size()) == v.res_up[u]) --open;
      }
    }
  }

  std::vector<NodeId> senders;
  for (NodeId u = 0; u < n; ++u)
    if (v.participating[u] && v.res_up[u] > 0) senders.push_back(u);
  rng.shuffle(senders);

  std::vector<int> down = v.res_down;
  std::vector<TransferDirective> out;
  std::vector<int> order;
  for (NodeId u : senders) {
    int up = v.res_up[u];
    int emerg = v.kappa;
    order.clear();
    for (int k = 0; k < g.degree(u); ++k)
      if (!queue[u][k].empty() && down[g.neighbors(u)[k]] > 0) order.push_back(k);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const int sa = std::min(up, down[g.neighbors(u)[a]]);
      const int sb = std::min(up, down[g.neighbors(u)[b]]);
      if (sa != sb) return sa > sb;
      return tie[u][a] < tie[u][b];
    });
    if (static_cast<int>(order.size()) > v.tau) order.resize(v.tau);
    for (int k : order) {
      const NodeId w = g.neighbors(u)[k];
      for (ChunkIndex c : queue[u][k]) {
        if (up <= 0 || down[w] <= 0) break;
        std::uint8_t flags = kScheduled;
        if (v.emergency[u] && v.owner(c) == u) {
          if (emerg <= 0) continue;
          --emerg;
          flags |= kEmergency;
        }
        out.push_back({v.stage, u, w, c, flags});
        --up;
        --down[w];
      }
    }
  }
  return out;
}

void FloodHistory::ensure(const Overlay& g, int universe) {
  if (static_cast<int>(hist_.size()) == g.n()) return;
  hist_.assign(g.n(), {});
  for (NodeId u = 0; u < g.n(); ++u) hist_[u].assign(g.degree(u), Bitset(universe));
}

std::vector<TransferDirective> schedule_flooding(const StageView& v, std::uint64_t seed, FloodHistory& history) {
  Rng rng(derive_seed(seed, {0xf100d, static_cast<std::uint64_t>(v.stage)}));
  const auto& g = *v.overlay;
  history.ensure(g, v.universe->total());
  std::vector<TransferDirective> out;
  std::vector<int> cnt;
  for (NodeId u = 0; u < v.n(); ++u) {
    if (!v.participating[u] || v.res_up[u] <= 0) continue;
    Bitset e = v.eligible[u];
    int emerg = v.kappa;
    const auto& nb = g.neighbors(u);
    cnt.assign(nb.size(), 0);
    std::int64_t total = 0;
    auto recount = [&] {
      total = 0;
      for (std::size_t k = 0; k < nb.size(); ++k) {
        cnt[k] = v.participating[nb[k]] ? detail::count_andnot(e, history.row(u, static_cast<int>(k))) : 0;
        total += cnt[k];
      }
    };
    recount();
    for (int unit = 0; unit < v.res_up[u] && total > 0; ++unit) {
      auto r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
      std::size_t k = 0;
      while (r >= cnt[k]) r -= cnt[k++];
      const ChunkIndex c = detail::select_andnot(e, &history.row(u, static_cast<int>(k)), static_cast<int>(r));
      std::uint8_t flags = kScheduled;
      if (v.emergency[u] && v.owner(c) == u) {
        flags |= kEmergency;
        if (--emerg <= 0) {
          // Release budget spent: no further owner chunks this stage.
          detail::clear_range(e, v.universe->begin(u), v.universe->end(u));
        }
      }
      history.mark(u, static_cast<int>(k), c);
      out.push_back({v.stage, u, nb[k], c, flags});
      if (flags & kEmergency && emerg <= 0) recount();
      else {
        --cnt[k];
        --total;
      }
    }
  }
  return out;
}

NeighborhoodAnnouncement make_announcement(NodeId v, const StageView& view) {
  NeighborhoodAnnouncement a;
  a.node = v;
  a.available = Bitset(view.universe->total());
  for (NodeId u : view.overlay->neighbors(v))
    if (view.participating[u]) detail::or_into(a.available, view.eligible[u]);
  return a;
}

std::vector<TransferDirective> schedule_distributed(const StageView& v, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0xd157, static_cast<std::uint64_t>(v.stage)}));
  const auto& g = *v.overlay;
  const int n = v.n();
  std::vector<std::vector<std::pair<NodeId, ChunkIndex>>> queue(n);
  for (NodeId w = 0; w < n; ++w) {
    if (!v.participating[w] || v.res_down[w] <= 0) continue;
    const auto ann = make_announcement(w, v);
    RequestPool pool(std::vector<Bitset>{ann.available});
    // The node only knows its own inventory and the announcement.
    NodeId dummy;
    ChunkIndex c;
    int want = v.res_down[w];
    while (want > 0 && pool.draw(rng, dummy, c)) {
      if (v.held[w].test(c)) continue;
      --want;
      for (NodeId u : g.neighbors(w))
        if (v.participating[u] && v.eligible[u].test(c)) queue[u].push_back({w, c});
    }
  }
  std::vector<TransferDirective> out;
  std::vector<NodeId> recv;
  for (NodeId u = 0; u < n; ++u) {
    if (queue[u].empty() || v.res_up[u] <= 0) continue;
    rng.shuffle(queue[u]);
    int up = v.res_up[u];
    int emerg = v.kappa;
    recv.clear();
    for (auto [w, c] : queue[u]) {
      if (up <= 0) break;
      const bool known = std::find(recv.begin(), recv.end(), w) != recv.end();
      if (!known && static_cast<int>(recv.size()) >= v.tau) continue;
      std::uint8_t flags = kScheduled;
      if (v.emergency[u] && v.owner(c) == u) {
        if (emerg <= 0) continue;
        --emerg;
        flags |= kEmergency;
      }
      if (!known) recv.push_back(w);
      out.push_back({v.stage, u, w, c, flags});
      --up;
    }
  }
  return out;
}

std::pair<std::int64_t, std::int64_t> q_instances(const StageView& v) {
  std::int64_t inst = 0, good = 0;
  Bitset m(v.universe->total()), relay(v.universe->total());
  for (NodeId w = 0; w < v.n(); ++w) {
    if (!v.participating[w]) continue;
    std::fill(m.words().begin(), m.words().end(), 0);
    std::fill(relay.words().begin(), relay.words().end(), 0);
    for (NodeId u : v.overlay->neighbors(w)) {
      if (!v.participating[u]) continue;
      detail::or_into(m, v.held[u]);
      detail::or_into_except(relay, v.held[u], v.universe->begin(u), v.universe->end(u));
    }
    detail::andnot_into(m, v.held[w]);
    inst += m.count();
    good += detail::count_andnot(relay, v.held[w]);
  }
  return {inst, good};
}

}  // namespace fltorrent
