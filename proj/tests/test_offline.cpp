#include "doctest.h"

#include <set>

#include "fifolap/lab.hpp"
#include "fifolap/offline.hpp"

using namespace fifolap;

namespace {

ArrivalSequence make_seq(int capacity, std::vector<std::vector<Packet>> steps) {
  ArrivalSequence seq;
  seq.capacity = capacity;
  seq.steps = std::move(steps);
  return seq;
}

// Random instance inside the enumeration guard.
struct SmallInstance {
  ArrivalSequence seq;
  BufferState initial;
};

SmallInstance random_small(Rng& rng, bool with_initial) {
  SmallInstance inst;
  int T = static_cast<int>(rng.range(0, 8));
  int cap = static_cast<int>(rng.range(1, 3));
  inst.seq.capacity = cap;
  inst.seq.steps.resize(T);
  inst.initial.capacity = cap;
  int budget = 11;
  PacketId id = 1;
  if (with_initial) {
    int residents = static_cast<int>(rng.range(0, cap));
    for (int i = 0; i < residents && budget > 0; ++i, --budget)
      inst.initial.queue.push_back({id++, rng.range(1, 15)});
  }
  for (int s = 0; s < T; ++s) {
    int k = static_cast<int>(rng.range(0, 3));
    for (int i = 0; i < k && budget > 0; ++i, --budget)
      inst.seq.steps[s].push_back({id++, rng.range(1, 15)});
  }
  return inst;
}

}  // namespace

TEST_CASE("opt_dp picks the single best packet under capacity 1") {
  auto seq = make_seq(1, {{{1, 5}, {2, 3}}});
  OptResult r = opt_dp(seq);
  CHECK(r.value == 5);
  CHECK(r.accepted_ids == std::set<PacketId>{1});
  CHECK(opt_bruteforce(seq, BufferState{{}, 1}) == 5);
}

TEST_CASE("opt_dp drains across steps") {
  auto seq = make_seq(2, {{{1, 1}, {2, 10}}, {}});
  OptResult r = opt_dp(seq);
  CHECK(r.value == 11);
  CHECK(r.accepted_ids == std::set<PacketId>{1, 2});
  CHECK(opt_bruteforce(seq, BufferState{{}, 2}) == 11);
}

TEST_CASE("opt_dp of the empty instance is zero") {
  auto seq = make_seq(1, {});
  OptResult r = opt_dp(seq);
  CHECK(r.value == 0);
  CHECK(r.accepted_ids.empty());
  CHECK(r.schedule.entries.empty());
  CHECK(opt_bruteforce(seq, BufferState{{}, 1}) == 0);
}

TEST_CASE("opt_dp transmits initial residents over empty steps") {
  auto seq = make_seq(2, {{}, {}});
  BufferState initial{{{1, 9}, {2, 2}}, 2};
  OptResult r = opt_dp(seq, initial);
  CHECK(r.value == 11);
  CHECK(r.accepted_ids == std::set<PacketId>{1, 2});
  CHECK(opt_bruteforce(seq, initial) == 11);
}

TEST_CASE("residents ahead of the first arrival cannot be skipped") {
  // One resident of low value blocks the head until step 1 transmits it;
  // there is no arrival to attach a preemption to.
  auto seq = make_seq(2, {{}});
  BufferState initial{{{1, 1}, {2, 9}}, 2};
  OptResult r = opt_dp(seq, initial);
  CHECK(r.value == 1);
  CHECK(r.accepted_ids == std::set<PacketId>{1});
  CHECK(opt_bruteforce(seq, initial) == 1);
}

TEST_CASE("opt_bruteforce handles the single-packet instance") {
  auto seq = make_seq(1, {{{1, 7}}});
  CHECK(opt_bruteforce(seq, BufferState{{}, 1}) == 7);
}

TEST_CASE("opt_bruteforce enforces the enumeration guard") {
  ArrivalSequence seq;
  seq.capacity = 1;
  seq.steps.resize(23);
  for (int s = 0; s < 23; ++s) seq.steps[s].push_back({s + 1, 1});
  CHECK_THROWS_AS(opt_bruteforce(seq, BufferState{{}, 1}), std::invalid_argument);
}

TEST_CASE("opt_from_arrivals_only coincides with opt_bruteforce when the buffer is empty") {
  Rng rng(31337);
  for (int trial = 0; trial < 30; ++trial) {
    SmallInstance inst = random_small(rng, false);
    CHECK(opt_from_arrivals_only(inst.seq, inst.initial) ==
          opt_bruteforce(inst.seq, inst.initial));
  }
}

TEST_CASE("opt_from_arrivals_only drops a blocking resident") {
  auto seq = make_seq(1, {{{1, 5}}});
  BufferState initial{{{9, 9}}, 1};
  CHECK(opt_from_arrivals_only(seq, initial) == 5);
  CHECK(opt_from_arrivals_only(make_seq(1, {}), BufferState{{}, 1}) == 0);
}

TEST_CASE("oracle equivalence on random instances") {
  Rng rng(7);
  for (int trial = 0; trial < 120; ++trial) {
    SmallInstance inst = random_small(rng, true);
    CAPTURE(trial);
    CHECK(opt_dp(inst.seq, inst.initial).value == opt_bruteforce(inst.seq, inst.initial));
  }
}

TEST_CASE("buffered and empty-start optima differ by at most the resident value") {
  Rng rng(8);
  for (int trial = 0; trial < 120; ++trial) {
    SmallInstance inst = random_small(rng, true);
    Value with_buffer = opt_dp(inst.seq, inst.initial).value;
    Value from_empty = opt_dp(inst.seq, BufferState{{}, inst.seq.capacity}).value;
    Value eps = inst.initial.total_value();
    CAPTURE(trial);
    CHECK(from_empty - eps <= with_buffer);
    CHECK(with_buffer <= from_empty + eps);
  }
}

TEST_CASE("arrivals-only value never improves with a preloaded buffer") {
  Rng rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    SmallInstance inst = random_small(rng, true);
    CAPTURE(trial);
    CHECK(opt_from_arrivals_only(inst.seq, BufferState{{}, inst.seq.capacity}) >=
          opt_from_arrivals_only(inst.seq, inst.initial));
  }
}

TEST_CASE("adding a packet never lowers the optimum") {
  Rng rng(10);
  for (int trial = 0; trial < 80; ++trial) {
    SmallInstance inst = random_small(rng, false);
    if (inst.seq.step_count() == 0) continue;
    Value base = opt_dp(inst.seq, inst.initial).value;
    ArrivalSequence extended = inst.seq;
    int step = static_cast<int>(rng.range(0, extended.step_count() - 1));
    extended.steps[step].push_back({1000, rng.range(1, 15)});
    CAPTURE(trial);
    CHECK(opt_dp(extended, inst.initial).value >= base);
  }
}

TEST_CASE("the canonical schedule replays to exactly the accepted set") {
  Rng rng(11);
  for (int trial = 0; trial < 80; ++trial) {
    SmallInstance inst = random_small(rng, true);
    OptResult r = opt_dp(inst.seq, inst.initial);
    Trace replay = replay_schedule(inst.seq, inst.initial, r.accepted_ids);
    CHECK(replay.total_value() == r.value);
    std::set<PacketId> transmitted;
    for (const auto& e : replay.schedule.entries) transmitted.insert(e.packet.id);
    CHECK(transmitted == r.accepted_ids);
    validate_trace(replay, inst.seq, inst.initial);
  }
}

TEST_CASE("both tie-breaks reach the same optimal value") {
  Rng rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    SmallInstance inst = random_small(rng, true);
    OptResult more = opt_dp(inst.seq, inst.initial, TieBreak::kPreferMore);
    OptResult fewer = opt_dp(inst.seq, inst.initial, TieBreak::kPreferFewer);
    CAPTURE(trial);
    CHECK(more.value == fewer.value);
    CHECK(more.value == opt_bruteforce(inst.seq, inst.initial));
  }
}

TEST_CASE("the tie-breaks pick different packets on value ties") {
  // Two equal packets, room for one: the canonical pick is the lower id, the
  // alternate the higher.
  auto seq = make_seq(1, {{{1, 5}, {2, 5}}});
  OptResult more = opt_dp(seq, BufferState{{}, 1}, TieBreak::kPreferMore);
  OptResult fewer = opt_dp(seq, BufferState{{}, 1}, TieBreak::kPreferFewer);
  CHECK(more.value == 5);
  CHECK(fewer.value == 5);
  CHECK(more.accepted_ids == std::set<PacketId>{1});
  CHECK(fewer.accepted_ids == std::set<PacketId>{2});
}

TEST_CASE("opt_dp is deterministic") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    SmallInstance inst = random_small(rng, true);
    OptResult a = opt_dp(inst.seq, inst.initial);
    OptResult b = opt_dp(inst.seq, inst.initial);
    CHECK(a.value == b.value);
    CHECK(a.accepted_ids == b.accepted_ids);
    CHECK(a.schedule.entries == b.schedule.entries);
  }
}
