#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fltorrent/engine.hpp"
#include "fltorrent/types.hpp"

namespace fltorrent {

// SHA-256 over the 8-byte little-endian encoding of the seed, lowercase hex.
std::string commit_seed(std::uint64_t seed);
std::string sha256_hex(const std::string& bytes);

struct LogEntry {
  int stage = 0;
  NodeId sender = 0;
  NodeId receiver = 0;
  NodeId chunk_owner = 0;
  int chunk_index = 1;  // 1-based within the owner's update
  std::uint8_t flags = kScheduled;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct RoundLog {
  std::string hash = "sha256";
  std::string commit;
  std::uint64_t seed = 0;
  int n = 0;
  int m = 0;
  std::string config_digest;  // sha256 of the canonical config JSON
  std::vector<LogEntry> directives;
};

std::string config_digest(const RoundConfig& cfg);

RoundLog make_round_log(const RoundConfig& cfg, const ChunkUniverse& u, const std::vector<TransferDirective>& log);

// Line format: "key=value" header lines, a column header line, then one
// "stage,sender,receiver,chunk_owner,chunk_index,flags" row per directive.
std::string serialize(const RoundLog& log);
RoundLog parse_round_log(const std::string& text);  // throws std::runtime_error

struct Verdict {
  bool accept = true;
  std::string reason;  // hash | config | malformed | adjacency | cap | duplicate
  std::string detail;
};

// Checks, in order: seed against commit, config and header, adjacency of
// every non-spray directive on the regenerated overlay, per-stage caps,
// duplicate deliveries not flagged as retries.
Verdict verify_round_log(const std::string& commit, std::uint64_t seed, const RoundLog& log, const RoundConfig& cfg);

}  // namespace fltorrent
