#include "fltorrent/engine.hpp"

#include <algorithm>

namespace fltorrent {

namespace {

std::uint64_t pair_key(NodeId r, ChunkIndex c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 32) | static_cast<std::uint32_t>(c);
}

void reset_budgets(SimState& s) {
  for (int v = 0; v < s.n(); ++v) {
    s.residual_up[v] = s.active[v] ? s.caps[v].up_chunks : 0;
    s.residual_down[v] = s.active[v] ? s.caps[v].down_chunks : 0;
  }
}

void apply_dropouts(SimState& s) {
  for (std::size_t i = 0; i < s.faults.dropouts.size(); ++i) {
    const auto& d = s.faults.dropouts[i];
    if (!s.dropout_applied[i] && d.slot <= s.slot) {
      s.dropout_applied[i] = 1;
      if (s.active[d.node]) mark_inactive(s, d.node, "dropout");
    }
  }
}

void event(SimState& s, EventKind k, const TransferDirective& d, std::string reason = {}) {
  s.events.push_back({s.slot, k, d, std::move(reason)});
}

}  // namespace

std::string flags_to_string(std::uint8_t f) {
  std::string out;
  auto add = [&](const char* n) {
    if (!out.empty()) out += '|';
    out += n;
  };
  if (f & kScheduled) add("scheduled");
  if (f & kSpray) add("spray");
  if (f & kRetry) add("retry");
  if (f & kEmergency) add("emergency");
  return out.empty() ? "none" : out;
}

std::uint8_t flags_from_string(const std::string& s) {
  std::uint8_t f = 0;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto end = s.find('|', pos);
    if (end == std::string::npos) end = s.size();
    const auto tok = s.substr(pos, end - pos);
    if (tok == "scheduled") f |= kScheduled;
    else if (tok == "spray") f |= kSpray;
    else if (tok == "retry") f |= kRetry;
    else if (tok == "emergency") f |= kEmergency;
    else if (tok != "none" && !tok.empty()) throw std::invalid_argument("unknown flag '" + tok + "'");
    pos = end + 1;
  }
  return f;
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::warmup: return "warmup";
    case Phase::bittorrent: return "bittorrent";
    case Phase::spray: return "spray";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::skipped_inactive: return "skipped_inactive";
    case EventKind::duplicate_cancelled: return "duplicate_cancelled";
    case EventKind::deferred_capacity: return "deferred_capacity";
    case EventKind::byz_withheld: return "byz_withheld";
    case EventKind::byz_delayed: return "byz_delayed";
    case EventKind::failed_delivery: return "failed_delivery";
    case EventKind::marked_inactive: return "marked_inactive";
  }
  return "?";
}

std::int64_t SimState::sum_up() const {
  std::int64_t s = 0;
  for (auto& c : caps) s += c.up_chunks;
  return s;
}

SimState make_state(const ChunkUniverse& universe, const std::vector<Capacities>& caps, std::uint64_t seed,
                    const FaultSpec& faults) {
  SimState s;
  const int n = universe.nodes();
  s.universe = universe;
  s.caps = caps;
  s.inv.reserve(n);
  for (NodeId v = 0; v < n; ++v) {
    s.inv.emplace_back(universe.total(), universe.begin(v), universe.end(v));
    for (ChunkIndex c = universe.begin(v); c < universe.end(v); ++c) s.inv[v].add(c);
  }
  s.active.assign(n, 1);
  s.residual_up.assign(n, 0);
  s.residual_down.assign(n, 0);
  s.pseudonym_salt = derive_seed(seed, {0x95e});
  s.round_pseudonym.resize(n);
  for (NodeId v = 0; v < n; ++v)
    s.round_pseudonym[v] = pseudonym_token({v, universe.round(), PseudonymKind::round, 0}, s.pseudonym_salt);
  s.faults = faults;
  s.byz_index.assign(n, -1);
  for (std::size_t i = 0; i < faults.byz_nodes.size(); ++i) s.byz_index[faults.byz_nodes[i].node] = static_cast<int>(i);
  s.fault_rng.reseed(derive_seed(seed, {0xfa17}));
  s.last_progress.assign(n, 0);
  s.dropout_applied.assign(faults.dropouts.size(), 0);
  s.sent_by_node.assign(n, 0);
  apply_dropouts(s);
  reset_budgets(s);
  return s;
}

void mark_inactive(SimState& s, NodeId v, const std::string& reason) {
  if (!s.active[v]) return;
  s.active[v] = 0;
  s.residual_up[v] = 0;
  s.residual_down[v] = 0;
  TransferDirective d{s.slot, v, v, 0, 0};
  event(s, EventKind::marked_inactive, d, reason);
}

StepResult apply_spray(SimState& s, const std::vector<TransferDirective>& spray) {
  StepResult r;
  for (const auto& d : spray) {
    if (!s.active[d.sender] || !s.active[d.receiver]) {
      event(s, EventKind::skipped_inactive, d, "inactive endpoint");
      r.skipped.push_back(d);
      continue;
    }
    if (!s.inv[d.receiver].add(d.chunk)) {
      event(s, EventKind::duplicate_cancelled, d);
      r.cancelled.push_back(d);
      continue;
    }
    const auto token = pseudonym_token({d.sender, s.universe.round(), PseudonymKind::spray, ++s.spray_serial}, s.pseudonym_salt);
    s.observations.push_back({d.receiver, token, s.universe.id_of(d.chunk), -1, Phase::spray});
    s.log.push_back(d);
    r.executed.push_back(d);
  }
  return r;
}

StepResult step(SimState& s, std::vector<TransferDirective> directives) {
  StepResult r;
  // Carried-over directives go first so the budget reserved for them is honoured.
  std::stable_sort(directives.begin(), directives.end(), [&s](const TransferDirective& a, const TransferDirective& b) {
    const bool ca = a.stage < s.slot, cb = b.stage < s.slot;
    if (ca != cb) return ca;
    if (a.sender != b.sender) return a.sender < b.sender;
    if (a.receiver != b.receiver) return a.receiver < b.receiver;
    return a.chunk < b.chunk;
  });
  std::int64_t sent = 0;
  for (auto d : directives) {
    if (!s.active[d.sender] || !s.active[d.receiver]) {
      event(s, EventKind::skipped_inactive, d, !s.active[d.sender] ? "sender inactive" : "receiver inactive");
      r.skipped.push_back(d);
      continue;
    }
    if (s.inv[d.receiver].has(d.chunk)) {
      event(s, EventKind::duplicate_cancelled, d);
      r.cancelled.push_back(d);
      continue;
    }
    const int bi = s.byz_index[d.sender];
    if (bi >= 0) {
      const auto& b = s.faults.byz_nodes[bi];
      if (b.behavior == ByzBehavior::withhold && s.fault_rng.bernoulli(b.prob)) {
        event(s, EventKind::byz_withheld, d);
        r.deferred.push_back(d);
        continue;
      }
      if (b.behavior == ByzBehavior::delay && s.slot - d.stage < b.delay_slots) {
        event(s, EventKind::byz_delayed, d);
        r.deferred.push_back(d);
        continue;
      }
    }
    if (s.residual_up[d.sender] <= 0 || s.residual_down[d.receiver] <= 0) {
      event(s, EventKind::deferred_capacity, d);
      r.deferred.push_back(d);
      continue;
    }
    --s.residual_up[d.sender];
    --s.residual_down[d.receiver];
    ++sent;
    ++s.sent_by_node[d.sender];
    TransferDirective done = d;
    done.stage = s.slot;
    const auto key = pair_key(d.receiver, d.chunk);
    if (s.failed_pairs.count(key)) done.flags |= kRetry;
    if (!s.inv[d.sender].has(d.chunk)) {
      // Bytes moved but the descriptor hash check fails at the receiver.
      event(s, EventKind::failed_delivery, done, "sender does not hold chunk");
      s.failed_pairs.insert(key);
      s.log.push_back(done);
      continue;
    }
    s.inv[d.receiver].add(d.chunk);
    s.last_progress[d.sender] = s.slot;
    s.last_progress[d.receiver] = s.slot;
    s.observations.push_back({d.receiver, s.round_pseudonym[d.sender], s.universe.id_of(d.chunk), s.slot, s.phase});
    s.log.push_back(done);
    r.carried += d.stage < s.slot;
    r.executed.push_back(done);
  }
  s.sent_per_slot.push_back(sent);

  if (s.faults.progress_timeout > 0) {
    const int total = s.universe.total();
    for (NodeId v = 0; v < s.n(); ++v)
      if (s.active[v] && s.inv[v].count < total && s.slot - s.last_progress[v] >= s.faults.progress_timeout)
        mark_inactive(s, v, "progress timeout");
  }
  ++s.slot;
  apply_dropouts(s);
  reset_budgets(s);
  return r;
}

double utilization(const std::vector<std::int64_t>& sent_per_slot, int H, std::int64_t sum_up) {
  if (H < 1 || sum_up <= 0) return 0.0;
  std::int64_t total = 0;
  for (int s = 0; s < H && s < static_cast<int>(sent_per_slot.size()); ++s) total += sent_per_slot[s];
  return static_cast<double>(total) / (static_cast<double>(H) * static_cast<double>(sum_up));
}

double utilization(const SimState& state, int H) { return utilization(state.sent_per_slot, H, state.sum_up()); }

}  // namespace fltorrent
