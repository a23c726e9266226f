#pragma once

#include <string>

#include "fltorrent/types.hpp"

namespace fltorrent {

// Config files are JSON objects whose keys are the RoundConfig field names,
// e.g. {"n": 100, "m": 10, "beta": 0.1, "scheduler": "greedy_ff"}.
// Unknown keys are rejected. fault_spec is an object:
//   {"dropouts": [[node, slot], ...],
//    "byz_nodes": [{"node": 3, "behavior": "withhold", "prob": 0.5}, ...],
//    "progress_timeout": 20}
RoundConfig parse_config(const std::string& text);
RoundConfig load_config(const std::string& path);

// Canonical (sorted-key, compact) serialization; parse_config round-trips it.
std::string to_json(const RoundConfig& cfg);

// Applies "key=value" using the same key names as the file format.
void set_field(RoundConfig& cfg, const std::string& key, const std::string& value);

}  // namespace fltorrent
