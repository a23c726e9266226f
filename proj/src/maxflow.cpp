#include "fltorrent/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

#include "bitops.hpp"

namespace fltorrent {

int FlowGraph::add_arc(int from, int to, std::int64_t cap) {
  if (cap < 0) throw std::invalid_argument("negative capacity");
  const int id = static_cast<int>(to_.size());
  to_.push_back(to);
  cap_.push_back(cap);
  orig_.push_back(cap);
  head_[from].push_back(id);
  to_.push_back(from);
  cap_.push_back(0);
  orig_.push_back(0);
  head_[to].push_back(id + 1);
  return id;
}

bool FlowGraph::bfs(int s, int t) {
  level_.assign(head_.size(), -1);
  std::vector<int> q;
  q.reserve(head_.size());
  q.push_back(s);
  level_[s] = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const int v = q[i];
    for (int a : head_[v])
      if (cap_[a] > 0 && level_[to_[a]] < 0) {
        level_[to_[a]] = level_[v] + 1;
        q.push_back(to_[a]);
      }
  }
  return level_[t] >= 0;
}

std::int64_t FlowGraph::dfs(int v, int t, std::int64_t pushed) {
  if (v == t) return pushed;
  for (int& i = it_[v]; i < static_cast<int>(head_[v].size()); ++i) {
    const int a = head_[v][i];
    const int u = to_[a];
    if (cap_[a] <= 0 || level_[u] != level_[v] + 1) continue;
    const std::int64_t got = dfs(u, t, std::min(pushed, cap_[a]));
    if (got > 0) {
      cap_[a] -= got;
      cap_[a ^ 1] += got;
      return got;
    }
  }
  return 0;
}

std::int64_t FlowGraph::max_flow(int s, int t) {
  if (s == t) return 0;
  std::int64_t total = 0;
  while (bfs(s, t)) {
    it_.assign(head_.size(), 0);
    while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += f;
  }
  return total;
}

namespace {

FlowNetwork skeleton(const StageView& v) {
  FlowNetwork net;
  const int n = v.n();
  net.graph = FlowGraph(2);
  net.stage = v.stage;
  net.emergency = v.emergency;
  net.universe = v.universe;
  net.uploader.resize(n);
  net.collector.resize(n);
  for (NodeId u = 0; u < n; ++u) {
    net.uploader[u] = net.graph.add_node();
    net.graph.add_arc(net.source, net.uploader[u], v.participating[u] ? std::max(0, v.res_up[u]) : 0);
  }
  for (NodeId w = 0; w < n; ++w) {
    net.collector[w] = net.graph.add_node();
    net.graph.add_arc(net.collector[w], net.sink, v.participating[w] ? std::max(0, v.res_down[w]) : 0);
  }
  return net;
}

void add_request(FlowNetwork& net, const StageView& v, NodeId w, ChunkIndex c) {
  const int r = net.graph.add_node();
  net.requests.push_back({w, c, r});
  net.graph.add_arc(r, net.collector[w], 1);
  for (NodeId u : v.overlay->neighbors(w))
    if (v.participating[u] && v.eligible[u].test(c)) {
      const int a = net.graph.add_arc(net.uploader[u], r, 1);
      net.availability.push_back({a, u, w, c});
    }
}

}  // namespace

FlowNetwork build_stage_network(const StageView& v) {
  FlowNetwork net = skeleton(v);
  for (NodeId w = 0; w < v.n(); ++w) {
    if (!v.participating[w]) continue;
    missing_set(w, v).for_each([&](int c) { add_request(net, v, w, c); });
  }
  return net;
}

FlowNetwork build_stage_network_reduced(const StageView& v) {
  FlowNetwork net = skeleton(v);
  const int total = v.universe->total();
  Bitset keep(total);
  for (NodeId w = 0; w < v.n(); ++w) {
    if (!v.participating[w] || v.res_down[w] <= 0) continue;
    const int d = v.res_down[w];
    std::fill(keep.words().begin(), keep.words().end(), 0);
    const auto& held = v.held[w].words();
    auto& kw = keep.words();
    for (NodeId u : v.overlay->neighbors(w)) {
      if (!v.participating[u] || v.res_up[u] <= 0) continue;
      const auto& e = v.eligible[u].words();
      int have = 0, avail = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        const std::uint64_t s = e[i] & ~held[i];
        have += std::popcount(s & kw[i]);
        avail += std::popcount(s);
      }
      int need = std::min(d, avail) - have;
      for (std::size_t i = 0; i < e.size() && need > 0; ++i) {
        std::uint64_t s = e[i] & ~held[i] & ~kw[i];
        while (s && need > 0) {
          kw[i] |= s & (~s + 1);
          s &= s - 1;
          --need;
        }
      }
    }
    keep.for_each([&](int c) { add_request(net, v, w, c); });
  }
  return net;
}

FlowResult max_flow(FlowNetwork& net) { return {net.graph.max_flow(net.source, net.sink)}; }

std::vector<TransferDirective> decode_schedule(const FlowNetwork& net) {
  std::vector<TransferDirective> out;
  for (const auto& a : net.availability) {
    const auto f = net.graph.flow(a.arc);
    if (f != 0 && f != 1) throw std::logic_error("non-integral flow on availability arc");
    if (f == 1) {
      std::uint8_t flags = kScheduled;
      if (net.emergency[a.sender] && net.universe->owner_of(a.chunk) == a.sender) flags |= kEmergency;
      out.push_back({net.stage, a.sender, a.receiver, a.chunk, flags});
    }
  }
  return out;
}

std::vector<TransferDirective> schedule_maxflow(const StageView& view, std::int64_t* value) {
  FlowNetwork net = build_stage_network_reduced(view);
  const auto r = max_flow(net);
  if (value) *value = r.value;
  return decode_schedule(net);
}

std::int64_t stage_bound(const StageView& view) {
  FlowNetwork net = build_stage_network_reduced(view);
  return max_flow(net).value;
}

}  // namespace fltorrent
