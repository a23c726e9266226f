#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fltorrent/engine.hpp"
#include "fltorrent/overlay.hpp"

namespace fltorrent {

// Local rarest-first swarming. Rarity of a chunk for receiver w is the number
// of active neighbors holding it; per-receiver bucket orderings are kept
// incrementally so one slot costs roughly O(transfers * degree).
class BtScheduler {
 public:
  BtScheduler(const Overlay& g, const SimState& s, int tau);

  // Requests for the current slot. Receivers issue requests one at a time in
  // a random interleaving; each takes its rarest missing chunk (random among
  // equals) that some neighbor with spare uplink and fewer than tau other
  // receivers can serve, picking that holder at random.
  std::vector<TransferDirective> plan(const SimState& s, std::uint64_t seed);

  // Folds executed deliveries (and any change of the active set) into the rarity counts.
  void update(const SimState& s, const std::vector<TransferDirective>& executed);

  int rarity(NodeId w, ChunkIndex c) const { return cnt_[idx(w, c)]; }

 private:
  std::size_t idx(NodeId w, ChunkIndex c) const { return static_cast<std::size_t>(w) * total_ + c; }
  void rebuild(const SimState& s);
  void bump(NodeId w, ChunkIndex c);
  void settle(NodeId w, ChunkIndex c);

  const Overlay* g_;
  int tau_;
  int n_;
  int total_;
  std::vector<std::uint8_t> active_;
  // Per receiver: chunks ordered by rarity bucket; bucket k spans
  // [start[w][k], start[w][k+1]); the last bucket (deg+1) holds owned chunks.
  std::vector<std::int32_t> order_, pos_;
  std::vector<std::uint16_t> cnt_;
  std::vector<std::vector<std::int32_t>> start_;
};

// One-shot wrapper: builds a scheduler for the state and plans a single slot.
std::vector<TransferDirective> bt_step(const Overlay& g, const SimState& s, int tau, std::uint64_t seed);

// True when no active node misses a chunk held by any active node.
bool disseminated(const SimState& s);

struct UpdateVector {
  NodeId owner = 0;
  double weight = 1.0;
  std::vector<double> values;
};

std::vector<UpdateVector> synthetic_updates(int n, int len, std::uint64_t seed);

// Owners whose complete chunk set v holds. Throws std::runtime_error when empty.
std::vector<NodeId> reconstructable_set(NodeId v, const SimState& s);

// Weighted mean over members, accumulated in ascending owner order.
std::vector<double> fedavg(const std::vector<UpdateVector>& updates, std::vector<NodeId> members);

// FNV-1a over the raw bytes of the vector, as 16 hex digits.
std::string checksum(const std::vector<double>& v);

}  // namespace fltorrent
