#include "fltorrent/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fltorrent {

using nlohmann::json;

namespace {

const char* behavior_name(ByzBehavior b) {
  switch (b) {
    case ByzBehavior::lie_bitfield: return "lie_bitfield";
    case ByzBehavior::withhold: return "withhold";
    case ByzBehavior::delay: return "delay";
  }
  return "?";
}

ByzBehavior parse_behavior(const std::string& s) {
  if (s == "lie_bitfield") return ByzBehavior::lie_bitfield;
  if (s == "withhold") return ByzBehavior::withhold;
  if (s == "delay") return ByzBehavior::delay;
  throw ConfigError("unknown byzantine behavior '" + s + "'");
}

json fault_to_json(const FaultSpec& f) {
  json j = json::object();
  j["dropouts"] = json::array();
  for (auto& d : f.dropouts) j["dropouts"].push_back({d.node, d.slot});
  j["byz_nodes"] = json::array();
  for (auto& b : f.byz_nodes)
    j["byz_nodes"].push_back({{"node", b.node}, {"behavior", behavior_name(b.behavior)}, {"prob", b.prob}, {"delay", b.delay_slots}});
  j["progress_timeout"] = f.progress_timeout;
  return j;
}

FaultSpec fault_from_json(const json& j) {
  FaultSpec f;
  if (!j.is_object()) throw ConfigError("fault_spec must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "dropouts") {
      for (auto& d : *it) {
        if (!d.is_array() || d.size() != 2) throw ConfigError("dropout entries are [node, slot]");
        f.dropouts.push_back({d[0].get<NodeId>(), d[1].get<int>()});
      }
    } else if (k == "byz_nodes") {
      for (auto& b : *it) {
        ByzNode z;
        z.node = b.at("node").get<NodeId>();
        z.behavior = parse_behavior(b.at("behavior").get<std::string>());
        z.prob = b.value("prob", 0.0);
        z.delay_slots = b.value("delay", 0);
        f.byz_nodes.push_back(z);
      }
    } else if (k == "progress_timeout") {
      f.progress_timeout = it->get<int>();
    } else {
      throw ConfigError("unknown fault_spec key '" + k + "'");
    }
  }
  return f;
}

json config_to_json(const RoundConfig& c) {
  json j;
  j["n"] = c.n;
  j["m"] = c.m;
  j["K"] = c.K;
  j["chunk_bytes"] = c.chunk_bytes;
  j["slot_seconds"] = c.slot_seconds;
  j["s_max"] = c.s_max;
  j["beta"] = c.beta;
  j["R"] = c.R;
  j["T_lag"] = c.T_lag;
  j["kappa"] = c.kappa;
  j["tau"] = c.tau;
  j["scheduler"] = to_string(c.scheduler);
  j["seed"] = c.seed;
  j["fault_spec"] = fault_to_json(c.fault_spec);
  j["round"] = c.round;
  j["non_owner_first"] = c.non_owner_first;
  j["heterogeneous_K"] = c.heterogeneous_K;
  j["K_min"] = c.K_min;
  j["K_max"] = c.K_max;
  j["uplink_mbps_min"] = c.uplink_mbps_min;
  j["uplink_mbps_max"] = c.uplink_mbps_max;
  j["downlink_mbps_min"] = c.downlink_mbps_min;
  j["downlink_mbps_max"] = c.downlink_mbps_max;
  j["bt_phase"] = c.bt_phase;
  j["bt_max_slots"] = c.bt_max_slots;
  j["vector_len"] = c.vector_len;
  j["eps"] = c.eps;
  j["attackers"] = c.attackers;
  j["phi"] = c.phi;
  return j;
}

template <class T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + key + "'");
  }
}

void apply(RoundConfig& c, const std::string& k, const json& v) {
  if (k == "n") c.n = as<int>(v, k);
  else if (k == "m") c.m = as<int>(v, k);
  else if (k == "K") c.K = as<int>(v, k);
  else if (k == "chunk_bytes") c.chunk_bytes = as<int>(v, k);
  else if (k == "slot_seconds") c.slot_seconds = as<double>(v, k);
  else if (k == "s_max") c.s_max = as<int>(v, k);
  else if (k == "beta") c.beta = as<double>(v, k);
  else if (k == "R") c.R = as<double>(v, k);
  else if (k == "T_lag") c.T_lag = as<int>(v, k);
  else if (k == "kappa") c.kappa = as<int>(v, k);
  else if (k == "tau") c.tau = as<int>(v, k);
  else if (k == "scheduler") c.scheduler = parse_scheduler(as<std::string>(v, k));
  else if (k == "seed") c.seed = as<std::uint64_t>(v, k);
  else if (k == "fault_spec") c.fault_spec = fault_from_json(v);
  else if (k == "round") c.round = as<int>(v, k);
  else if (k == "non_owner_first") c.non_owner_first = as<bool>(v, k);
  else if (k == "heterogeneous_K") c.heterogeneous_K = as<bool>(v, k);
  else if (k == "K_min") c.K_min = as<int>(v, k);
  else if (k == "K_max") c.K_max = as<int>(v, k);
  else if (k == "uplink_mbps_min") c.uplink_mbps_min = as<double>(v, k);
  else if (k == "uplink_mbps_max") c.uplink_mbps_max = as<double>(v, k);
  else if (k == "downlink_mbps_min") c.downlink_mbps_min = as<double>(v, k);
  else if (k == "downlink_mbps_max") c.downlink_mbps_max = as<double>(v, k);
  else if (k == "bt_phase") c.bt_phase = as<bool>(v, k);
  else if (k == "bt_max_slots") c.bt_max_slots = as<int>(v, k);
  else if (k == "vector_len") c.vector_len = as<int>(v, k);
  else if (k == "eps") c.eps = as<double>(v, k);
  else if (k == "attackers") c.attackers = as<int>(v, k);
  else if (k == "phi") c.phi = as<double>(v, k);
  else throw ConfigError("unknown config key '" + k + "'");
}

}  // namespace

RoundConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RoundConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) apply(c, it.key(), *it);
  return c;
}

RoundConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const RoundConfig& cfg) { return config_to_json(cfg).dump(); }

void set_field(RoundConfig& cfg, const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;  // bare strings such as scheduler names
  }
  apply(cfg, key, v);
}

}  // namespace fltorrent
