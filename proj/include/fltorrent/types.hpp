#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fltorrent {

using NodeId = std::int32_t;
using ChunkIndex = std::int32_t;  // dense index into the round's chunk universe

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PseudonymKind : std::uint8_t { round, spray };

struct Pseudonym {
  NodeId node = 0;
  int round = 0;
  PseudonymKind kind = PseudonymKind::round;
  std::uint64_t serial = 0;  // distinguishes one-off spray pseudonyms
};

// Opaque label an observer sees. The salt is per-round secret material, so
// the label carries no node index.
std::uint64_t pseudonym_token(const Pseudonym& p, std::uint64_t salt);

struct ChunkId {
  NodeId owner = 0;
  int round = 0;
  int index = 1;  // 1-based within the owner's update

  friend bool operator==(const ChunkId&, const ChunkId&) = default;
  friend auto operator<=>(const ChunkId&, const ChunkId&) = default;
};

// Maps (owner, index) <-> dense ChunkIndex. Owners occupy contiguous ranges.
class ChunkUniverse {
 public:
  ChunkUniverse() = default;
  ChunkUniverse(const std::vector<int>& per_owner, int round);

  int total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int nodes() const { return static_cast<int>(offsets_.size()) - 1; }
  int K(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  ChunkIndex begin(NodeId v) const { return offsets_[v]; }
  ChunkIndex end(NodeId v) const { return offsets_[v + 1]; }
  NodeId owner_of(ChunkIndex c) const { return owner_[c]; }
  ChunkIndex index_of(const ChunkId& id) const { return offsets_[id.owner] + id.index - 1; }
  ChunkId id_of(ChunkIndex c) const { return {owner_[c], round_, c - offsets_[owner_[c]] + 1}; }
  int round() const { return round_; }

 private:
  std::vector<int> offsets_;
  std::vector<NodeId> owner_;
  int round_ = 0;
};

class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(int bits) : bits_(bits), w_((bits + 63) / 64, 0) {}

  int size() const { return bits_; }
  bool test(int i) const { return (w_[i >> 6] >> (i & 63)) & 1ULL; }
  void set(int i) { w_[i >> 6] |= 1ULL << (i & 63); }
  void reset(int i) { w_[i >> 6] &= ~(1ULL << (i & 63)); }
  int count() const {
    int c = 0;
    for (auto x : w_) c += std::popcount(x);
    return c;
  }
  std::vector<std::uint64_t>& words() { return w_; }
  const std::vector<std::uint64_t>& words() const { return w_; }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < w_.size(); ++k) {
      std::uint64_t x = w_[k];
      while (x) {
        int b = std::countr_zero(x);
        f(static_cast<int>(k * 64 + b));
        x &= x - 1;
      }
    }
  }

  friend bool operator==(const Bitset&, const Bitset&) = default;

 private:
  int bits_ = 0;
  std::vector<std::uint64_t> w_;
};

struct Inventory {
  Bitset held;
  ChunkIndex owner_begin = 0;  // owner_mask is [owner_begin, owner_end)
  ChunkIndex owner_end = 0;
  int count = 0;

  Inventory() = default;
  Inventory(int universe, ChunkIndex ob, ChunkIndex oe) : held(universe), owner_begin(ob), owner_end(oe) {}

  bool has(ChunkIndex c) const { return held.test(c); }
  bool owns(ChunkIndex c) const { return c >= owner_begin && c < owner_end; }
  // Returns false if the chunk was already present.
  bool add(ChunkIndex c) {
    if (held.test(c)) return false;
    held.set(c);
    ++count;
    return true;
  }
  int owner_held() const;
  int nonowner_held() const { return count - owner_held(); }
  Bitset owner_mask() const;
};

struct Capacities {
  double uplink_bps = 0;
  double downlink_bps = 0;
  int up_chunks = 0;
  int down_chunks = 0;
};

enum class Scheduler { random_fifo, random_ff, greedy_ff, flooding, distributed, maxflow };

const char* to_string(Scheduler s);
Scheduler parse_scheduler(const std::string& s);

enum class ByzBehavior { lie_bitfield, withhold, delay };

struct ByzNode {
  NodeId node = 0;
  ByzBehavior behavior = ByzBehavior::withhold;
  double prob = 0.0;  // lie_bitfield / withhold
  int delay_slots = 0;
};

struct Dropout {
  NodeId node = 0;
  int slot = 0;
};

struct FaultSpec {
  std::vector<Dropout> dropouts;
  std::vector<ByzNode> byz_nodes;
  int progress_timeout = 0;  // 0 disables

  bool empty() const { return dropouts.empty() && byz_nodes.empty() && progress_timeout == 0; }
};

struct RoundConfig {
  int n = 100;
  int m = 10;
  int K = 206;
  int chunk_bytes = 262144;
  double slot_seconds = 1.0;
  int s_max = 5000;
  double beta = 0.10;
  double R = 0.2;
  int T_lag = 3;
  int kappa = 1;
  int tau = 4;
  Scheduler scheduler = Scheduler::greedy_ff;
  std::uint64_t seed = 1;
  FaultSpec fault_spec;

  int round = 1;
  bool non_owner_first = true;
  // Heterogeneous update sizes: K_v uniform in [K_min, K_max] when enabled.
  bool heterogeneous_K = false;
  int K_min = 0;
  int K_max = 0;
  double uplink_mbps_min = 15.5;
  double uplink_mbps_max = 25.3;
  double downlink_mbps_min = 36.5;
  double downlink_mbps_max = 121.0;
  bool bt_phase = true;
  int bt_max_slots = 20000;
  int vector_len = 64;
  double eps = 0.1;
  int attackers = 1;
  double phi = 1.0;
};

// Throws ConfigError on inconsistent values (non-positive counts, n <= m,
// k_beta larger than the universe, ...).
void validate(const RoundConfig& cfg);

// Per-owner chunk counts implied by the config (seeded when heterogeneous).
std::vector<int> chunk_counts(const RoundConfig& cfg);

std::int64_t compute_k_beta(double beta, std::int64_t total_chunks);
int chunks_per_slot(double rate_bps, double slot_s, int chunk_bytes);
std::int64_t required_nonowner_mass(std::int64_t k_beta, std::int64_t K_v);

// Seeded per-node access links drawn uniformly from the configured ranges.
std::vector<Capacities> sample_capacities(const RoundConfig& cfg);

}  // namespace fltorrent
