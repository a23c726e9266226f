#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fltorrent/engine.hpp"
#include "fltorrent/overlay.hpp"
#include "fltorrent/types.hpp"

namespace fltorrent {

struct SprayPlan {
  std::vector<TransferDirective> directives;  // stage -1, kSpray
  std::vector<std::string> warnings;
};

// floor(R * K_v) distinct owner chunks per node, each to a uniformly random
// non-neighbor. Nodes adjacent to everyone are skipped with a warning.
SprayPlan preround_spray(const Overlay& overlay, const ChunkUniverse& universe, double R, std::uint64_t seed);

std::vector<int> sample_lags(int n, int T_lag, std::uint64_t seed);

struct WarmupState {
  std::vector<int> lags;
  std::vector<std::pair<NodeId, ChunkIndex>> sprayed;  // (recipient, chunk)
  std::int64_t k_beta = 0;
  int kappa = 1;
  std::vector<std::uint8_t> crossed_threshold;
  // Owner chunks already relayed at least once, per node (indexed from owner_begin).
  std::vector<std::vector<std::uint8_t>> owner_sent;
  std::vector<int> owner_rotation;  // round-robin cursor once every owner chunk was relayed
  std::vector<std::uint8_t> emergency;  // emergency release armed for this stage
  std::int64_t emergency_releases = 0;

  void init(const SimState& s, std::int64_t k_beta, int kappa, std::vector<int> lags);
  bool started(NodeId v, int slot) const { return slot >= lags[v]; }
  // Refreshes crossed_threshold from inventories.
  void update_threshold(const SimState& s);
  // Records owner chunks relayed in executed directives and advances rotation.
  void note_executed(const SimState& s, const std::vector<TransferDirective>& executed);
};

// Owner chunks currently offered by v: up to kappa of them once v holds
// k_beta chunks (or while an emergency release is armed), otherwise none.
std::vector<ChunkIndex> offered_owner_chunks(NodeId v, const Inventory& inv, const WarmupState& ws);

// All held non-owner chunks plus offered_owner_chunks.
Bitset eligible_buffer(NodeId v, const Inventory& inv, const WarmupState& ws);

enum class WarmupDecision { continue_warmup, switch_to_bt, fail_open };
const char* to_string(WarmupDecision d);

WarmupDecision warmup_complete(const SimState& s, std::int64_t k_beta, int s_max);

}  // namespace fltorrent
