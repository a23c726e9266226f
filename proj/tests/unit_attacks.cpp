#include <set>

#include "doctest.h"
#include "fltorrent/attacks.hpp"
#include "fltorrent/harness.hpp"

using namespace fltorrent;

namespace {

// Observer 9 sees chunks from pseudonym p with the given owner labels, one per slot.
std::vector<ObservationRecord> stream(NodeId observer, std::vector<std::pair<std::uint64_t, NodeId>> seq,
                                      Phase phase = Phase::warmup) {
  std::vector<ObservationRecord> out;
  int slot = 0;
  for (auto [p, owner] : seq) out.push_back({observer, p, ChunkId{owner, 1, slot + 1}, slot, phase}), ++slot;
  return out;
}

NodeId guess_for(const AttackOutput& o, std::uint64_t p) {
  for (const auto& g : o.guesses)
    if (g.pseudonym == p) return g.descriptor;
  return -1;
}

}  // namespace

TEST_CASE("attack names") {
  for (Attack a : all_attacks()) CHECK(parse_attack(to_string(a)) == a);
  CHECK(parse_attack("count") == Attack::amount_greedy);
  CHECK_THROWS_AS(parse_attack("oracle"), std::invalid_argument);
}

TEST_CASE("sequential guesses the first descriptor per sender") {
  const auto obs = stream(9, {{100, 3}, {200, 5}, {100, 7}, {100, 7}, {200, 2}});
  const auto o = attack_sequential(obs);
  CHECK(o.attacker == 9);
  REQUIRE(o.guesses.size() == 2);
  CHECK(guess_for(o, 100) == 3);
  CHECK(guess_for(o, 200) == 5);
  CHECK(attack_sequential({}).guesses.empty());
}

TEST_CASE("amount-greedy counts the early half, ties go to the lowest id") {
  // five transfers from 100: the first three count
  const auto o = attack_amount_greedy(stream(9, {{100, 4}, {100, 6}, {100, 6}, {100, 4}, {100, 4}}));
  CHECK(guess_for(o, 100) == 6);
  // four transfers: first two, one each
  const auto t = attack_amount_greedy(stream(9, {{100, 8}, {100, 2}, {100, 8}, {100, 8}}));
  CHECK(guess_for(t, 100) == 2);
  CHECK(guess_for(attack_amount_greedy(stream(9, {{1, 5}})), 1) == 5);
}

TEST_CASE("clustering weighs early arrivals harmonically") {
  // 3 at ranks 0 -> 1.0; 5 at ranks 1,2,3 -> 1/2+1/3+1/4 = 1.083
  const auto o = attack_clustering(stream(9, {{100, 3}, {100, 5}, {100, 5}, {100, 5}}));
  CHECK(guess_for(o, 100) == 5);
  // 3 at rank 0 beats 5 at ranks 1,2 (0.833)
  const auto p = attack_clustering(stream(9, {{100, 3}, {100, 5}, {100, 5}}));
  CHECK(guess_for(p, 100) == 3);
}

TEST_CASE("asr scores per receiver and skips silent ones") {
  const GroundTruth truth = {{100, 3}, {200, 5}};
  AttackOutput a{1, {{100, 3}, {200, 1}}};
  AttackOutput b{2, {{100, 3}}};
  AttackOutput c{3, {}};
  const auto r = asr({a, b, c}, truth, 4);
  CHECK(r.per_receiver[1] == doctest::Approx(0.5));
  CHECK(r.per_receiver[2] == doctest::Approx(1.0));
  CHECK(r.per_receiver[3] < 0);
  CHECK(r.per_receiver[0] < 0);
  CHECK(r.receivers == 2);
  CHECK(r.max == doctest::Approx(1.0));
  CHECK(r.mean == doctest::Approx(0.75));
  // a spray label is absent from the truth table and never counts as right
  CHECK(asr({AttackOutput{1, {{999, 3}}}}, truth, 4).max == 0.0);
}

TEST_CASE("split_by_observer drops spray and honours the scope") {
  std::vector<ObservationRecord> obs = {
      {0, 1, {2, 1, 1}, -1, Phase::spray},
      {0, 1, {2, 1, 2}, 0, Phase::warmup},
      {1, 1, {2, 1, 3}, 5, Phase::bittorrent},
  };
  auto all = split_by_observer(obs, 2, {});
  CHECK(all[0].size() == 1);
  CHECK(all[1].size() == 1);
  auto warm = split_by_observer(obs, 2, {true, false});
  CHECK(warm[1].empty());
  auto bt = split_by_observer(obs, 2, {false, true});
  CHECK(bt[0].empty());
}

TEST_CASE("coalitions") {
  // observers 0 and 1; honest senders 100 (node 5) and 200 (node 6); 300 is member 1's pseudonym
  std::vector<std::vector<ObservationRecord>> by(4);
  by[0] = stream(0, {{100, 1}, {100, 5}, {300, 1}, {200, 6}});
  by[1] = stream(1, {{100, 5}, {200, 0}, {200, 6}});
  const GroundTruth truth = {{100, 5}, {200, 6}, {300, 1}};

  SUBCASE("a coalition of one is the single attacker") {
    for (Attack a : all_attacks()) {
      const auto r = collude(a, by, {{0}, 1.0, 1}, {}, truth);
      const auto solo = asr({run_attack(a, by[0])}, truth, 4);
      CHECK(r.per_attacker == doctest::Approx(solo.per_receiver[0]));
    }
  }
  SUBCASE("alliance filtering removes member-origin records") {
    const auto r = collude(Attack::sequential, by, {{0, 1}, 1.0, 1}, {300}, truth);
    // member 0 without owner-1 chunks and pseudonym 300: 100 -> 5, 200 -> 6
    // member 1 without owner-0 chunks: 100 -> 5, 200 -> 6
    CHECK(r.per_attacker == doctest::Approx(1.0));
    CHECK(r.any_succeeds == doctest::Approx(1.0));
    CHECK(r.targets == 2);
    const auto none = collude(Attack::sequential, by, {{0, 1}, 0.0, 1}, {300}, truth);
    // unfiltered: member 0 guesses 100 -> 1, member 1 guesses 200 -> 0
    CHECK(none.per_attacker == doctest::Approx(0.5));
    CHECK(none.any_succeeds == doctest::Approx(1.0));
  }
  SUBCASE("pooled view covers every member record") {
    const auto pooled = pool_observations(by, {0, 1});
    CHECK(pooled.size() == by[0].size() + by[1].size());
    for (std::size_t i = 1; i < pooled.size(); ++i) CHECK(pooled[i - 1].slot <= pooled[i].slot);
    const auto r = collude(Attack::amount_greedy, by, {{0, 1}, 1.0, 1}, {300}, truth);
    CHECK(r.pooled_records == 4u);
  }
  CHECK_THROWS_AS(collude(Attack::sequential, by, {{}, 1.0, 1}, {}, truth), std::invalid_argument);
}

TEST_CASE("without gating the first chunk from a sender is its own") {
  RoundConfig c;
  c.n = 30;
  c.m = 4;
  c.K = 20;
  c.seed = 2;
  c.beta = 0.0001;
  c.R = 0;
  c.T_lag = 1;
  RunOptions o;
  o.audit = false;
  o.aggregate = false;
  const auto run = run_round(c, o);
  bool found = false;
  for (const auto& row : run.report.asr)
    if (row.attack == Attack::sequential && !row.warmup_only) {
      found = true;
      CHECK(row.max == doctest::Approx(1.0));
    }
  CHECK(found);
}
