#pragma once

#include <cstdint>
#include <vector>

#include "fltorrent/engine.hpp"
#include "fltorrent/overlay.hpp"
#include "fltorrent/warmup.hpp"

namespace fltorrent {

// What the tracker sees at the start of a warm-up stage.
struct StageView {
  const Overlay* overlay = nullptr;
  const ChunkUniverse* universe = nullptr;
  std::vector<Bitset> held;      // tracker bitfields (may include lies)
  std::vector<Bitset> eligible;  // empty bitset for non-participants
  std::vector<int> res_up;
  std::vector<int> res_down;
  std::vector<std::uint8_t> participating;  // active and past its start lag
  std::vector<std::uint8_t> emergency;      // owner chunks offered only as emergency releases
  int tau = 4;
  int kappa = 1;
  bool non_owner_first = true;
  int stage = 0;

  int n() const { return static_cast<int>(held.size()); }
  NodeId owner(ChunkIndex c) const { return universe->owner_of(c); }
};

// Snapshot of the engine state for the current slot. Byzantine lie_bitfield
// nodes advertise extra chunks drawn from rng.
StageView make_stage_view(const SimState& s, const Overlay& g, const WarmupState& ws, int tau, bool non_owner_first,
                          Rng* lie_rng = nullptr);

// Union of participating neighbors' bitfields minus v's own.
Bitset missing_set(NodeId v, const StageView& view);
// Chunks of missing_set that at least one participating neighbor can serve now.
Bitset requestable_set(NodeId v, const StageView& view);

// Stable partition: non-owners first, the chunk's owner last.
std::vector<NodeId> non_owner_first(const std::vector<NodeId>& candidates, ChunkIndex chunk, const ChunkUniverse& u);

std::vector<TransferDirective> schedule_random_fifo(const StageView& view, std::uint64_t seed);
std::vector<TransferDirective> schedule_random_fastest_first(const StageView& view, std::uint64_t seed);
std::vector<TransferDirective> schedule_greedy_fastest_first(const StageView& view, std::uint64_t seed);

// Per-node memory of (neighbor, chunk) pairs already flooded.
class FloodHistory {
 public:
  void ensure(const Overlay& g, int universe);
  bool sent(NodeId u, int nbr_slot, ChunkIndex c) const { return hist_[u][nbr_slot].test(c); }
  void mark(NodeId u, int nbr_slot, ChunkIndex c) { hist_[u][nbr_slot].set(c); }
  const Bitset& row(NodeId u, int nbr_slot) const { return hist_[u][nbr_slot]; }

 private:
  std::vector<std::vector<Bitset>> hist_;
};

std::vector<TransferDirective> schedule_flooding(const StageView& view, std::uint64_t seed, FloodHistory& history);

struct NeighborhoodAnnouncement {
  NodeId node = 0;
  Bitset available;  // union over neighbors, holder mapping hidden
};

NeighborhoodAnnouncement make_announcement(NodeId v, const StageView& view);

// Each node requests up to its residual downlink from its announcement and
// broadcasts the requests; every neighbor that holds a requested chunk may
// serve it (FIFO, tau receivers). Duplicates are left for the engine.
std::vector<TransferDirective> schedule_distributed(const StageView& view, std::uint64_t seed);

// Fraction of (receiver, missing chunk) instances with a non-owner holder
// among the receiver's neighbors. Returns {instances, with_nonowner_holder}.
std::pair<std::int64_t, std::int64_t> q_instances(const StageView& view);

}  // namespace fltorrent
