#include "fltorrent/attacks.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "fltorrent/rng.hpp"

namespace fltorrent {

const char* to_string(Attack a) {
  switch (a) {
    case Attack::sequential: return "sequential";
    case Attack::amount_greedy: return "amount_greedy";
    case Attack::clustering: return "clustering";
  }
  return "?";
}

Attack parse_attack(const std::string& s) {
  if (s == "sequential") return Attack::sequential;
  if (s == "amount_greedy" || s == "count") return Attack::amount_greedy;
  if (s == "clustering" || s == "cluster") return Attack::clustering;
  throw std::invalid_argument("unknown attack '" + s + "'");
}

std::vector<Attack> all_attacks() { return {Attack::sequential, Attack::amount_greedy, Attack::clustering}; }

namespace {

// Sender pseudonym -> descriptors in arrival order.
std::map<std::uint64_t, std::vector<NodeId>> by_sender(const std::vector<ObservationRecord>& obs) {
  std::map<std::uint64_t, std::vector<NodeId>> out;
  for (const auto& r : obs) out[r.sender_pseudonym].push_back(r.chunk.owner);
  return out;
}

NodeId observer_of(const std::vector<ObservationRecord>& obs) { return obs.empty() ? -1 : obs.front().observer; }

template <class Score>
AttackOutput argmax_attack(const std::vector<ObservationRecord>& obs, Score score) {
  AttackOutput out;
  out.attacker = observer_of(obs);
  for (const auto& [p, descs] : by_sender(obs)) {
    std::map<NodeId, double> s;
    score(descs, s);
    NodeId best = -1;
    double bv = -1;
    for (const auto& [d, v] : s)  // ascending descriptor: ties keep the lowest id
      if (v > bv) {
        bv = v;
        best = d;
      }
    if (best >= 0) out.guesses.push_back({p, best});
  }
  return out;
}

}  // namespace

AttackOutput attack_sequential(const std::vector<ObservationRecord>& obs) {
  AttackOutput out;
  out.attacker = observer_of(obs);
  for (const auto& [p, descs] : by_sender(obs)) out.guesses.push_back({p, descs.front()});
  return out;
}

AttackOutput attack_amount_greedy(const std::vector<ObservationRecord>& obs) {
  return argmax_attack(obs, [](const std::vector<NodeId>& d, std::map<NodeId, double>& s) {
    const std::size_t early = (d.size() + 1) / 2;
    for (std::size_t i = 0; i < early; ++i) s[d[i]] += 1;
  });
}

AttackOutput attack_clustering(const std::vector<ObservationRecord>& obs) {
  return argmax_attack(obs, [](const std::vector<NodeId>& d, std::map<NodeId, double>& s) {
    for (std::size_t i = 0; i < d.size(); ++i) s[d[i]] += 1.0 / (1.0 + static_cast<double>(i));
  });
}

AttackOutput run_attack(Attack a, const std::vector<ObservationRecord>& obs) {
  switch (a) {
    case Attack::sequential: return attack_sequential(obs);
    case Attack::amount_greedy: return attack_amount_greedy(obs);
    case Attack::clustering: return attack_clustering(obs);
  }
  throw std::invalid_argument("attack");
}

GroundTruth ground_truth(const SimState& s) {
  GroundTruth t;
  for (NodeId v = 0; v < s.n(); ++v) t[s.round_pseudonym[v]] = v;
  return t;
}

AsrSummary asr(const std::vector<AttackOutput>& outputs, const GroundTruth& truth, int n) {
  AsrSummary r;
  r.per_receiver.assign(n, -1.0);
  double sum = 0;
  for (const auto& o : outputs) {
    if (o.guesses.empty() || o.attacker < 0) continue;
    int ok = 0;
    for (const auto& g : o.guesses) {
      auto it = truth.find(g.pseudonym);
      if (it != truth.end() && it->second == g.descriptor) ++ok;
    }
    const double v = static_cast<double>(ok) / static_cast<double>(o.guesses.size());
    r.per_receiver[o.attacker] = v;
    r.max = std::max(r.max, v);
    sum += v;
    ++r.receivers;
  }
  r.mean = r.receivers ? sum / r.receivers : 0.0;
  return r;
}

std::vector<std::vector<ObservationRecord>> split_by_observer(const std::vector<ObservationRecord>& obs, int n,
                                                              ObservationScope scope) {
  std::vector<std::vector<ObservationRecord>> out(n);
  for (const auto& r : obs) {
    if (r.phase == Phase::spray) continue;
    if (r.phase == Phase::warmup && !scope.warmup) continue;
    if (r.phase == Phase::bittorrent && !scope.bittorrent) continue;
    out[r.observer].push_back(r);
  }
  return out;
}

std::vector<ObservationRecord> pool_observations(const std::vector<std::vector<ObservationRecord>>& by_observer,
                                                 const std::vector<NodeId>& members) {
  std::vector<ObservationRecord> all;
  for (NodeId m : members) all.insert(all.end(), by_observer[m].begin(), by_observer[m].end());
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.slot < b.slot; });
  return all;
}

CollusionResult collude(Attack a, const std::vector<std::vector<ObservationRecord>>& by_observer, const Coalition& c,
                        const std::unordered_set<std::uint64_t>& member_pseudonyms, const GroundTruth& truth) {
  if (c.members.empty()) throw std::invalid_argument("empty coalition");
  CollusionResult res;
  std::unordered_set<NodeId> in(c.members.begin(), c.members.end());
  // Recognition of a coalition-origin chunk is a fixed per-chunk coin so the
  // same chunk is treated alike by every member.
  auto recognized = [&](const ChunkId& id) {
    if (c.phi >= 1.0) return true;
    if (c.phi <= 0.0) return false;
    const auto h = derive_seed(c.seed, {static_cast<std::uint64_t>(id.owner), static_cast<std::uint64_t>(id.index)});
    return static_cast<double>(h >> 11) * 0x1.0p-53 < c.phi;
  };
  const bool single = c.members.size() == 1;
  std::vector<std::vector<ObservationRecord>> filtered;
  filtered.reserve(c.members.size());
  for (NodeId m : c.members) {
    std::vector<ObservationRecord> f;
    for (const auto& r : by_observer[m]) {
      if (!single && member_pseudonyms.count(r.sender_pseudonym)) continue;
      if (!single && in.count(r.chunk.owner) && recognized(r.chunk)) continue;
      f.push_back(r);
    }
    filtered.push_back(std::move(f));
  }

  std::map<std::uint64_t, bool> hit;  // target pseudonym -> some member right
  double sum = 0;
  int counted = 0;
  for (const auto& f : filtered) {
    const auto out = run_attack(a, f);
    if (out.guesses.empty()) continue;
    int ok = 0;
    for (const auto& g : out.guesses) {
      const auto it = truth.find(g.pseudonym);
      const bool right = it != truth.end() && it->second == g.descriptor;
      ok += right;
      hit[g.pseudonym] = hit[g.pseudonym] || right;
    }
    sum += static_cast<double>(ok) / static_cast<double>(out.guesses.size());
    ++counted;
  }
  res.per_attacker = counted ? sum / counted : 0.0;
  res.targets = static_cast<int>(hit.size());
  int any = 0;
  for (const auto& [p, h] : hit) any += h;
  res.any_succeeds = hit.empty() ? 0.0 : static_cast<double>(any) / static_cast<double>(hit.size());

  std::vector<NodeId> idx(filtered.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<NodeId>(i);
  const auto pooled = pool_observations(filtered, idx);
  res.pooled_records = pooled.size();
  const auto po = run_attack(a, pooled);
  int ok = 0;
  for (const auto& g : po.guesses) {
    const auto it = truth.find(g.pseudonym);
    ok += it != truth.end() && it->second == g.descriptor;
  }
  res.pooled = po.guesses.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(po.guesses.size());
  return res;
}

}  // namespace fltorrent
