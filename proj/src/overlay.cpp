#include "fltorrent/overlay.hpp"

#include <algorithm>
#include <stdexcept>

#include "fltorrent/rng.hpp"

namespace fltorrent {

Overlay::Overlay(int n) : n_(n), adj_(n), mat_(static_cast<std::size_t>(n) * n, 0) {}

bool Overlay::add_edge(NodeId u, NodeId v) {
  if (u == v || adjacent(u, v)) return false;
  adj_[u].push_back(v);
  adj_[v].push_back(u);
  mat_[static_cast<std::size_t>(u) * n_ + v] = 1;
  mat_[static_cast<std::size_t>(v) * n_ + u] = 1;
  return true;
}

void Overlay::finalize() {
  for (auto& a : adj_) std::sort(a.begin(), a.end());
}

int Overlay::min_degree() const {
  int d = n_ > 0 ? degree(0) : 0;
  for (NodeId v = 1; v < n_; ++v) d = std::min(d, degree(v));
  return d;
}

double Overlay::avg_degree() const { return n_ ? 2.0 * static_cast<double>(edges()) / n_ : 0.0; }

std::int64_t Overlay::edges() const {
  std::int64_t e = 0;
  for (auto& a : adj_) e += static_cast<std::int64_t>(a.size());
  return e / 2;
}

std::vector<std::vector<NodeId>> Overlay::components() const {
  std::vector<int> comp(n_, -1);
  std::vector<std::vector<NodeId>> out;
  for (NodeId s = 0; s < n_; ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<NodeId> stack{s};
    comp[s] = id;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      out[id].push_back(v);
      for (NodeId u : adj_[v])
        if (comp[u] < 0) {
          comp[u] = id;
          stack.push_back(u);
        }
    }
    std::sort(out[id].begin(), out[id].end());
  }
  return out;
}

bool Overlay::connected() const { return n_ <= 1 || components().size() == 1; }

Overlay generate_overlay(int n, int m, std::uint64_t seed) {
  if (m < 1 || n <= m) throw std::invalid_argument("infeasible degree: need n > m >= 1");
  Rng rng(derive_seed(seed, {0x0e1a7}));
  const int cap = n - 1;
  std::vector<int> target(n);
  for (auto& t : target) t = static_cast<int>(rng.between(m, std::min(2 * m, cap)));

  Overlay g(n);
  std::vector<NodeId> stubs;
  for (NodeId v = 0; v < n; ++v) stubs.insert(stubs.end(), target[v], v);
  rng.shuffle(stubs);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) g.add_edge(stubs[i], stubs[i + 1]);

  // Top up nodes below m. Prefer partners that are still below their own
  // target so the degree profile stays close to the drawn one.
  std::vector<NodeId> order(n);
  for (NodeId v = 0; v < n; ++v) order[v] = v;
  rng.shuffle(order);
  std::vector<NodeId> pref, any;
  for (NodeId v : order) {
    while (g.degree(v) < m) {
      pref.clear();
      any.clear();
      for (NodeId u = 0; u < n; ++u) {
        if (u == v || g.adjacent(u, v)) continue;
        any.push_back(u);
        if (g.degree(u) < target[u]) pref.push_back(u);
      }
      const auto& pool = pref.empty() ? any : pref;
      g.add_edge(v, pool[rng.below(pool.size())]);
    }
  }

  auto comps = g.components();
  for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
    NodeId a = comps[i][rng.below(comps[i].size())];
    NodeId b = comps[i + 1][rng.below(comps[i + 1].size())];
    g.add_edge(a, b);
  }
  g.finalize();
  return g;
}

}  // namespace fltorrent
