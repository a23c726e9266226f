#pragma once

#include <cstdint>
#include <vector>

#include "fltorrent/types.hpp"

namespace fltorrent {

class Overlay {
 public:
  Overlay() = default;
  explicit Overlay(int n);

  int n() const { return n_; }
  const std::vector<NodeId>& neighbors(NodeId v) const { return adj_[v]; }
  int degree(NodeId v) const { return static_cast<int>(adj_[v].size()); }
  bool adjacent(NodeId u, NodeId v) const { return u != v && mat_[static_cast<std::size_t>(u) * n_ + v]; }
  int min_degree() const;
  double avg_degree() const;
  std::int64_t edges() const;
  bool connected() const;
  // Connected components, each listed in ascending id order; components
  // ordered by their smallest member.
  std::vector<std::vector<NodeId>> components() const;

  // Returns false for self-loops and existing edges.
  bool add_edge(NodeId u, NodeId v);
  // Sorts neighbor lists; call after the last add_edge.
  void finalize();

  friend bool operator==(const Overlay& a, const Overlay& b) { return a.n_ == b.n_ && a.adj_ == b.adj_; }

 private:
  int n_ = 0;
  std::vector<std::vector<NodeId>> adj_;
  std::vector<std::uint8_t> mat_;
};

// Random overlay with minimum degree m. Each node draws a target degree in
// [m, 2m] (capped at n-1); stubs are paired by a seeded shuffle, self-loops
// and duplicates discarded, under-degree nodes topped up, and remaining
// components bridged. Pure function of (n, m, seed).
Overlay generate_overlay(int n, int m, std::uint64_t seed);

}  // namespace fltorrent
