#pragma once

#include <cstdint>
#include <vector>

#include "fltorrent/engine.hpp"
#include "fltorrent/schedulers.hpp"

namespace fltorrent {

// Integer-capacity flow network with Dinic's blocking-flow solver.
class FlowGraph {
 public:
  explicit FlowGraph(int nodes = 0) : head_(nodes) {}
  int add_node() {
    head_.emplace_back();
    return static_cast<int>(head_.size()) - 1;
  }
  int nodes() const { return static_cast<int>(head_.size()); }
  // Returns the arc id; the reverse arc is id ^ 1.
  int add_arc(int from, int to, std::int64_t cap);
  std::int64_t max_flow(int s, int t);
  std::int64_t flow(int arc) const { return orig_[arc] - cap_[arc]; }
  std::int64_t capacity(int arc) const { return orig_[arc]; }
  int from(int arc) const { return to_[arc ^ 1]; }
  int to(int arc) const { return to_[arc]; }
  int arcs() const { return static_cast<int>(to_.size()); }

 private:
  bool bfs(int s, int t);
  std::int64_t dfs(int v, int t, std::int64_t pushed);
  std::vector<std::vector<int>> head_;
  std::vector<int> to_;
  std::vector<std::int64_t> cap_, orig_;
  std::vector<int> level_, it_;
};

// Stage network: source -> uploader(v) [u_v] -> request(w,c) [1] ->
// collector(w) [1] -> sink [d_w]; an uploader->request arc exists iff v is
// a neighbor of w, c is in v's eligible buffer and c is missing at w.
struct FlowNetwork {
  FlowGraph graph;
  int source = 0;
  int sink = 1;
  std::vector<int> uploader;   // node id per NodeId
  std::vector<int> collector;  // node id per NodeId
  struct Request {
    NodeId receiver;
    ChunkIndex chunk;
    int node;
  };
  std::vector<Request> requests;
  struct Availability {
    int arc;
    NodeId sender;
    NodeId receiver;
    ChunkIndex chunk;
  };
  std::vector<Availability> availability;
  int stage = 0;
  std::vector<std::uint8_t> emergency;  // copied from the view for flag decoding
  const ChunkUniverse* universe = nullptr;
};

// Full construction: one request node per (w, c) with c in missing_set(w).
FlowNetwork build_stage_network(const StageView& view);

// Same max-flow value with fewer request nodes: per receiver w and
// neighbor v only min(d_w, |servable(v,w)|) requests servable by v are
// kept, which preserves every feasible per-receiver load (Hall's condition).
FlowNetwork build_stage_network_reduced(const StageView& view);

struct FlowResult {
  std::int64_t value = 0;
};

FlowResult max_flow(FlowNetwork& net);

// One directive per saturated uploader->request arc.
std::vector<TransferDirective> decode_schedule(const FlowNetwork& net);

// Convenience: reduced network, solve, decode.
std::vector<TransferDirective> schedule_maxflow(const StageView& view, std::int64_t* value = nullptr);
std::int64_t stage_bound(const StageView& view);

}  // namespace fltorrent
