#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fltorrent/engine.hpp"

namespace fltorrent {

enum class Attack { sequential, amount_greedy, clustering };
const char* to_string(Attack a);
Attack parse_attack(const std::string& s);
std::vector<Attack> all_attacks();

// One guess per sender pseudonym: "this pseudonym's own descriptor is d".
// Descriptors are chunk-owner labels.
struct Guess {
  std::uint64_t pseudonym = 0;
  NodeId descriptor = 0;
};

struct AttackOutput {
  NodeId attacker = -1;
  std::vector<Guess> guesses;  // ascending pseudonym
};

// Inputs are one observer's records in arrival order.
AttackOutput attack_sequential(const std::vector<ObservationRecord>& obs);
// Argmax descriptor count over the first ceil(half) of each sender's transfers.
AttackOutput attack_amount_greedy(const std::vector<ObservationRecord>& obs);
// Argmax of sum 1/(1 + rank) per descriptor, rank = arrival rank within the sender.
AttackOutput attack_clustering(const std::vector<ObservationRecord>& obs);
AttackOutput run_attack(Attack a, const std::vector<ObservationRecord>& obs);

// Pseudonym -> true node. Used only for scoring.
using GroundTruth = std::unordered_map<std::uint64_t, NodeId>;
GroundTruth ground_truth(const SimState& s);

struct AsrSummary {
  std::vector<double> per_receiver;  // negative when the receiver made no guess
  double max = 0;
  double mean = 0;
  int receivers = 0;  // receivers with at least one guess
};

// Per-receiver fraction of correct guesses; summaries skip receivers without guesses.
AsrSummary asr(const std::vector<AttackOutput>& outputs, const GroundTruth& truth, int n);

struct ObservationScope {
  bool warmup = true;
  bool bittorrent = true;
  // Spray pseudonyms are single-use, so a "first chunk" guess on them is
  // trivially right and says nothing about linkage; they are excluded.
};

// Per-observer record lists in arrival order.
std::vector<std::vector<ObservationRecord>> split_by_observer(const std::vector<ObservationRecord>& obs, int n,
                                                              ObservationScope scope);

struct Coalition {
  std::vector<NodeId> members;
  double phi = 1.0;
  std::uint64_t seed = 0;  // drives which coalition-origin chunks are recognized when phi < 1
};

struct CollusionResult {
  double per_attacker = 0;  // mean of members' individual ASR after alliance filtering
  double any_succeeds = 0;  // honest senders seen by the coalition with >= 1 correct member guess
  double pooled = 0;        // attack on the union of members' observations
  int targets = 0;
  std::size_t pooled_records = 0;
};

// member_pseudonyms are the coalition's own round pseudonyms (known to it).
// Records of chunks owned by members are dropped with probability phi, and
// records sent by members are dropped entirely.
CollusionResult collude(Attack a, const std::vector<std::vector<ObservationRecord>>& by_observer, const Coalition& c,
                        const std::unordered_set<std::uint64_t>& member_pseudonyms, const GroundTruth& truth);

// Union of the members' records, ordered by slot (stable in member order).
std::vector<ObservationRecord> pool_observations(const std::vector<std::vector<ObservationRecord>>& by_observer,
                                                 const std::vector<NodeId>& members);

}  // namespace fltorrent
