#include "fltorrent/swarm.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "bitops.hpp"
#include "fltorrent/rng.hpp"

namespace fltorrent {

BtScheduler::BtScheduler(const Overlay& g, const SimState& s, int tau)
    : g_(&g), tau_(tau), n_(s.n()), total_(s.universe.total()) {
  if (tau < 1) throw std::invalid_argument("tau must be at least 1");
  rebuild(s);
}

void BtScheduler::rebuild(const SimState& s) {
  active_ = s.active;
  const std::size_t cells = static_cast<std::size_t>(n_) * total_;
  order_.assign(cells, 0);
  pos_.assign(cells, 0);
  cnt_.assign(cells, 0);
  start_.assign(n_, {});
  std::vector<std::int32_t> fill;
  for (NodeId w = 0; w < n_; ++w) {
    const int deg = g_->degree(w);
    const int top = deg + 1;
    std::uint16_t* cw = &cnt_[idx(w, 0)];
    for (NodeId u : g_->neighbors(w))
      if (active_[u]) s.inv[u].held.for_each([&](int c) { ++cw[c]; });
    s.inv[w].held.for_each([&](int c) { cw[c] = static_cast<std::uint16_t>(top); });
    auto& st = start_[w];
    st.assign(top + 2, 0);
    for (int c = 0; c < total_; ++c) ++st[cw[c] + 1];
    for (int k = 1; k <= top + 1; ++k) st[k] += st[k - 1];
    fill.assign(st.begin(), st.end());
    std::int32_t* ow = &order_[idx(w, 0)];
    std::int32_t* pw = &pos_[idx(w, 0)];
    for (int c = 0; c < total_; ++c) {
      const int p = fill[cw[c]]++;
      ow[p] = c;
      pw[c] = p;
    }
  }
}

void BtScheduler::bump(NodeId w, ChunkIndex c) {
  std::int32_t* ow = &order_[idx(w, 0)];
  std::int32_t* pw = &pos_[idx(w, 0)];
  std::uint16_t& k = cnt_[idx(w, c)];
  auto& st = start_[w];
  const int p = pw[c];
  const int last = st[k + 1] - 1;
  const ChunkIndex other = ow[last];
  ow[last] = c;
  ow[p] = other;
  pw[c] = last;
  pw[other] = p;
  --st[k + 1];
  ++k;
}

void BtScheduler::settle(NodeId w, ChunkIndex c) {
  const int top = g_->degree(w) + 1;
  while (cnt_[idx(w, c)] < top) bump(w, c);
}

void BtScheduler::update(const SimState& s, const std::vector<TransferDirective>& executed) {
  if (s.active != active_) {
    rebuild(s);
    return;
  }
  for (const auto& d : executed) {
    settle(d.receiver, d.chunk);
    for (NodeId x : g_->neighbors(d.receiver))
      if (active_[x] && !s.inv[x].has(d.chunk)) bump(x, d.chunk);
  }
}

std::vector<TransferDirective> BtScheduler::plan(const SimState& s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TransferDirective> out;
  std::vector<int> up(n_), down(n_);
  std::vector<std::vector<NodeId>> serving(n_);
  std::vector<NodeId> recv;
  for (NodeId v = 0; v < n_; ++v) {
    up[v] = s.active[v] ? s.residual_up[v] : 0;
    down[v] = s.active[v] ? s.residual_down[v] : 0;
    if (down[v] > 0 && s.inv[v].count < total_ && start_[v][1] < start_[v][g_->degree(v) + 1]) recv.push_back(v);
  }
  rng.shuffle(recv);

  struct Cursor {
    int k = 1;
    int t = 0;
    int fails = 0;
    int limit = 0;
    bool fallback = false;
    std::vector<NodeId> pool;  // fallback candidates not yet found empty
  };
  std::vector<Cursor> cur(n_);
  std::vector<Bitset> req(n_);
  for (NodeId w : recv) {
    cur[w].limit = 2 * down[w] + 16;
    req[w] = Bitset(total_);
  }

  auto can_serve = [&](NodeId u, NodeId w) {
    if (!s.active[u] || up[u] <= 0) return false;
    const auto& sv = serving[u];
    return static_cast<int>(sv.size()) < tau_ || std::find(sv.begin(), sv.end(), w) != sv.end();
  };
  auto assign = [&](NodeId u, NodeId w, ChunkIndex c) {
    --up[u];
    --down[w];
    auto& sv = serving[u];
    if (std::find(sv.begin(), sv.end(), w) == sv.end()) sv.push_back(w);
    req[w].set(c);
    out.push_back({s.slot, u, w, c, kScheduled});
  };

  auto request = [&](NodeId w) -> bool {
    Cursor& cu = cur[w];
    const int deg = g_->degree(w);
    std::int32_t* ow = &order_[idx(w, 0)];
    std::int32_t* pw = &pos_[idx(w, 0)];
    const auto& st = start_[w];
    while (!cu.fallback) {
      while (cu.k <= deg && st[cu.k] + cu.t >= st[cu.k + 1]) {
        ++cu.k;
        cu.t = 0;
      }
      if (cu.k > deg || cu.fails >= cu.limit) {
        cu.fallback = true;
        for (NodeId u : g_->neighbors(w))
          if (s.active[u]) cu.pool.push_back(u);
        break;
      }
      const int lo = st[cu.k] + cu.t, hi = st[cu.k + 1];
      const int j = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo)));
      std::swap(ow[lo], ow[j]);
      pw[ow[lo]] = lo;
      pw[ow[j]] = j;
      const ChunkIndex c = ow[lo];
      ++cu.t;
      if (req[w].test(c)) continue;
      NodeId pick = -1;
      int seen = 0;
      for (NodeId u : g_->neighbors(w))
        if (s.inv[u].has(c) && can_serve(u, w) && rng.below(static_cast<std::uint64_t>(++seen)) == 0) pick = u;
      if (pick >= 0) {
        assign(pick, w, c);
        return true;
      }
      ++cu.fails;
    }
    // Rarest-first stalled on saturated holders: take any chunk a neighbor
    // with spare capacity can still serve.
    auto& pool = cu.pool;
    while (!pool.empty()) {
      const std::size_t i = rng.below(pool.size());
      const NodeId u = pool[i];
      if (can_serve(u, w)) {
        const auto& a = s.inv[u].held.words();
        const auto& b = s.inv[w].held.words();
        const auto& r = req[w].words();
        int avail = 0;
        for (std::size_t x = 0; x < a.size(); ++x) avail += std::popcount(a[x] & ~b[x] & ~r[x]);
        if (avail > 0) {
          int rank = static_cast<int>(rng.below(static_cast<std::uint64_t>(avail)));
          for (std::size_t x = 0; x < a.size(); ++x) {
            std::uint64_t word = a[x] & ~b[x] & ~r[x];
            const int pc = std::popcount(word);
            if (rank < pc) {
              for (int q = 0; q < rank; ++q) word &= word - 1;
              assign(u, w, static_cast<ChunkIndex>(x * 64 + std::countr_zero(word)));
              return true;
            }
            rank -= pc;
          }
        }
      }
      pool[i] = pool.back();
      pool.pop_back();
    }
    return false;
  };

  std::vector<NodeId> next;
  while (!recv.empty()) {
    next.clear();
    for (NodeId w : recv)
      if (down[w] > 0 && request(w) && down[w] > 0) next.push_back(w);
    recv.swap(next);
  }
  return out;
}

std::vector<TransferDirective> bt_step(const Overlay& g, const SimState& s, int tau, std::uint64_t seed) {
  BtScheduler b(g, s, tau);
  return b.plan(s, seed);
}

bool disseminated(const SimState& s) {
  Bitset all(s.universe.total());
  for (NodeId v = 0; v < s.n(); ++v)
    if (s.active[v]) detail::or_into(all, s.inv[v].held);
  const int want = all.count();
  for (NodeId v = 0; v < s.n(); ++v)
    if (s.active[v] && s.inv[v].count < want) return false;
  return true;
}

std::vector<UpdateVector> synthetic_updates(int n, int len, std::uint64_t seed) {
  std::vector<UpdateVector> out(n);
  for (NodeId u = 0; u < n; ++u) {
    Rng rng(derive_seed(seed, {0x6d0, static_cast<std::uint64_t>(u)}));
    out[u].owner = u;
    out[u].weight = static_cast<double>(rng.between(100, 1000));
    out[u].values.resize(len);
    for (auto& x : out[u].values) x = 2.0 * rng.uniform() - 1.0;
  }
  return out;
}

std::vector<NodeId> reconstructable_set(NodeId v, const SimState& s) {
  std::vector<NodeId> a;
  const auto& inv = s.inv[v];
  for (NodeId u = 0; u < s.universe.nodes(); ++u) {
    bool all = true;
    for (ChunkIndex c = s.universe.begin(u); c < s.universe.end(u) && all; ++c) all = inv.has(c);
    if (all) a.push_back(u);
  }
  if (a.empty()) throw std::runtime_error("node " + std::to_string(v) + ": no reconstructable update");
  return a;
}

std::vector<double> fedavg(const std::vector<UpdateVector>& updates, std::vector<NodeId> members) {
  if (members.empty()) throw std::domain_error("empty reconstructable set");
  std::sort(members.begin(), members.end());
  auto find = [&](NodeId u) -> const UpdateVector& {
    if (u >= 0 && u < static_cast<NodeId>(updates.size()) && updates[u].owner == u) return updates[u];
    for (const auto& x : updates)
      if (x.owner == u) return x;
    throw std::invalid_argument("no update for owner " + std::to_string(u));
  };
  double W = 0;
  for (NodeId u : members) W += find(u).weight;
  if (!(W > 0)) throw std::domain_error("zero total weight");
  const std::size_t len = find(members.front()).values.size();
  std::vector<double> agg(len, 0.0);
  for (NodeId u : members) {
    const auto& up = find(u);
    if (up.values.size() != len) throw std::invalid_argument("update length mismatch");
    const double a = up.weight / W;
    for (std::size_t i = 0; i < len; ++i) agg[i] += a * up.values[i];
  }
  return agg;
}

std::string checksum(const std::vector<double>& v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double x : v) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &x, sizeof b);
    for (unsigned char c : b) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 15];
  return out;
}

}  // namespace fltorrent
