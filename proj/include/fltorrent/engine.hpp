#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "fltorrent/rng.hpp"
#include "fltorrent/types.hpp"

namespace fltorrent {

enum DirectiveFlag : std::uint8_t {
  kScheduled = 1,
  kSpray = 2,
  kRetry = 4,
  kEmergency = 8,  // emergency_owner_release
};

std::string flags_to_string(std::uint8_t flags);
std::uint8_t flags_from_string(const std::string& s);

struct TransferDirective {
  int stage = 0;  // -1 for pre-round spray
  NodeId sender = 0;
  NodeId receiver = 0;
  ChunkIndex chunk = 0;
  std::uint8_t flags = kScheduled;

  friend bool operator==(const TransferDirective&, const TransferDirective&) = default;
};

enum class Phase : std::uint8_t { warmup, bittorrent, spray };
const char* to_string(Phase p);

struct ObservationRecord {
  NodeId observer = 0;
  std::uint64_t sender_pseudonym = 0;
  ChunkId chunk;
  int slot = 0;
  Phase phase = Phase::warmup;
};

enum class EventKind : std::uint8_t {
  skipped_inactive,
  duplicate_cancelled,
  deferred_capacity,
  byz_withheld,
  byz_delayed,
  failed_delivery,  // sender lacked the chunk; receiver discards it
  marked_inactive,
};
const char* to_string(EventKind k);

struct EngineEvent {
  int slot = 0;
  EventKind kind = EventKind::skipped_inactive;
  TransferDirective directive;
  std::string reason;
};

struct StepResult {
  std::vector<TransferDirective> executed;
  std::vector<TransferDirective> deferred;   // re-present next stage
  std::vector<TransferDirective> cancelled;  // receiver already held the chunk
  std::vector<TransferDirective> skipped;    // inactive endpoint
  std::int64_t carried = 0;                  // executed directives issued in an earlier stage
};

struct SimState {
  int slot = 0;
  Phase phase = Phase::warmup;
  ChunkUniverse universe;
  std::vector<Inventory> inv;
  std::vector<std::uint8_t> active;
  std::vector<Capacities> caps;
  std::vector<int> residual_up;
  std::vector<int> residual_down;
  std::vector<ObservationRecord> observations;
  std::vector<std::uint64_t> round_pseudonym;
  std::uint64_t pseudonym_salt = 0;
  std::uint64_t spray_serial = 0;

  FaultSpec faults;
  std::vector<int> byz_index;  // -1 for honest nodes
  Rng fault_rng;
  std::vector<int> last_progress;
  std::vector<std::uint8_t> dropout_applied;

  std::vector<EngineEvent> events;
  std::vector<TransferDirective> log;   // every delivery attempt that moved bytes, in order
  std::vector<std::int64_t> sent_per_slot;
  std::vector<std::int64_t> sent_by_node;
  std::unordered_set<std::uint64_t> failed_pairs;

  int n() const { return static_cast<int>(inv.size()); }
  bool is_active(NodeId v) const { return active[v] != 0; }
  std::int64_t sum_up() const;
};

// Builds slot-0 state: owner chunks placed, budgets set, dropouts at slot 0 applied.
SimState make_state(const ChunkUniverse& universe, const std::vector<Capacities>& caps, std::uint64_t seed,
                    const FaultSpec& faults = {});

// Executes the directives of the current slot, then advances to the next
// slot (budgets reset, scheduled dropouts and progress timeouts applied).
// Execution order is a stable sort by (sender, receiver, chunk).
StepResult step(SimState& state, std::vector<TransferDirective> directives);

// Spray happens before slot 0, off-overlay and uncharged.
StepResult apply_spray(SimState& state, const std::vector<TransferDirective>& spray);

void mark_inactive(SimState& state, NodeId v, const std::string& reason);

// Sum of chunks sent over the first H slots divided by H * sum_v u_v.
double utilization(const std::vector<std::int64_t>& sent_per_slot, int H, std::int64_t sum_up);
double utilization(const SimState& state, int H);

}  // namespace fltorrent
