#include "fifolap/offline.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace fifolap {

namespace {

constexpr Value kUnreachable = std::numeric_limits<Value>::min() / 4;

// Sort packets by value descending; the per-step pick is a prefix of this
// order. Equal values resolve to lower ids canonically, higher ids under the
// alternate tie-break.
std::vector<Packet> sorted_desc(std::vector<Packet> packets, TieBreak tie_break) {
  std::sort(packets.begin(), packets.end(),
            [tie_break](const Packet& a, const Packet& b) {
              if (a.value != b.value) return a.value > b.value;
              return tie_break == TieBreak::kPreferMore ? a.id < b.id : a.id > b.id;
            });
  return packets;
}

int next_occupancy(int occ_after_arrivals) {
  return occ_after_arrivals > 0 ? occ_after_arrivals - 1 : 0;
}

// First step with at least one arrival, or T+1 when none.
int first_arrival_step(const ArrivalSequence& seq) {
  for (int s = 1; s <= seq.step_count(); ++s)
    if (!seq.steps[s - 1].empty()) return s;
  return seq.step_count() + 1;
}

}  // namespace

PolicyDecision AcceptSetPolicy::on_arrival(const Packet& packet,
                                           const BufferState& buffer, int) {
  PolicyDecision d;
  for (const Packet& resident : buffer.queue)
    if (!target_.count(resident.id)) d.preemptions.push_back(resident.id);
  d.action = target_.count(packet.id) ? PolicyDecision::Action::kAccept
                                      : PolicyDecision::Action::kReject;
  return d;
}

Trace replay_schedule(const ArrivalSequence& seq, const BufferState& initial,
                      const std::set<PacketId>& accepted) {
  AcceptSetPolicy policy(std::unordered_set<PacketId>(accepted.begin(), accepted.end()));
  return simulate(policy, seq, initial);
}

OptResult opt_dp(const ArrivalSequence& seq, const BufferState& initial,
                 TieBreak tie_break) {
  validate_sequence(seq);
  validate_buffer(initial);
  if (initial.capacity != seq.capacity)
    throw ValidationError("initial buffer capacity does not match the sequence");

  const bool prefer_more = tie_break == TieBreak::kPreferMore;
  const int T = seq.step_count();
  const int cap = seq.capacity;
  const int s = first_arrival_step(seq);

  // Until the first arrival there is no decision to make: the head of the
  // initial buffer is transmitted once per step. Only the residue left when
  // the first packet arrives can be preempted.
  const int forced = std::min<int>(s - 1, initial.occupancy());
  OptResult result;
  Value forced_value = 0;
  for (int i = 0; i < forced; ++i) {
    forced_value += initial.queue[i].value;
    result.accepted_ids.insert(initial.queue[i].id);
  }

  std::vector<Packet> residue(initial.queue.begin() + forced, initial.queue.end());
  std::vector<Packet> residue_ranked = sorted_desc(residue, tie_break);

  // Suffix DP over steps s..T. g[i - s][j] is the best value collectible from
  // step i onward when j target packets are resident at the start of step i;
  // only occupancy-0 end states count, so every counted packet is transmitted.
  const int span = T - s + 1;
  std::vector<std::vector<Value>> g(span + 1, std::vector<Value>(cap + 1, kUnreachable));
  g[span][0] = 0;
  std::vector<std::vector<Packet>> ranked(span);
  for (int i = T; i >= s; --i) {
    const int row = i - s;
    ranked[row] = sorted_desc(seq.steps[i - 1], tie_break);
    std::vector<Value> gain(ranked[row].size() + 1, 0);
    for (std::size_t m = 0; m < ranked[row].size(); ++m)
      gain[m + 1] = gain[m] + ranked[row][m].value;
    for (int j = 0; j <= cap; ++j) {
      Value best = kUnreachable;
      const int max_m = std::min<int>(static_cast<int>(ranked[row].size()), cap - j);
      for (int m = 0; m <= max_m; ++m) {
        Value rest = g[row + 1][next_occupancy(j + m)];
        if (rest == kUnreachable) continue;
        best = std::max(best, gain[m] + rest);
      }
      g[row][j] = best;
    }
  }

  // Initial choice: keep the j most valuable residue packets; the tie-break
  // decides how many on equal value.
  int keep = 0;
  Value best_total = kUnreachable;
  if (span == 0) {
    keep = 0;
    best_total = 0;
  } else {
    Value keep_gain = 0;
    for (int j = 0; j <= static_cast<int>(residue_ranked.size()); ++j) {
      if (j > 0) keep_gain += residue_ranked[j - 1].value;
      if (g[0][j] == kUnreachable) continue;
      Value total = keep_gain + g[0][j];
      bool better = best_total == kUnreachable || total > best_total ||
                    (total == best_total && prefer_more);
      if (better) {
        best_total = total;
        keep = j;
      }
    }
  }
  if (best_total == kUnreachable)
    throw std::logic_error("offline solver found no feasible end state");

  for (int j = 0; j < keep; ++j) result.accepted_ids.insert(residue_ranked[j].id);

  // Forward pass: at every step take the extreme acceptance count (largest
  // canonically, smallest under the alternate) consistent with the optimum.
  int occ = keep;
  for (int i = s; i <= T; ++i) {
    const int row = i - s;
    std::vector<Value> gain(ranked[row].size() + 1, 0);
    for (std::size_t m = 0; m < ranked[row].size(); ++m)
      gain[m + 1] = gain[m] + ranked[row][m].value;
    const int max_m = std::min<int>(static_cast<int>(ranked[row].size()), cap - occ);
    int chosen = -1;
    for (int k = 0; k <= max_m; ++k) {
      int m = prefer_more ? max_m - k : k;
      Value rest = g[row + 1][next_occupancy(occ + m)];
      if (rest == kUnreachable) continue;
      if (gain[m] + rest == g[row][occ]) {
        chosen = m;
        break;
      }
    }
    if (chosen < 0) throw std::logic_error("offline backtracking lost the optimum");
    for (int m = 0; m < chosen; ++m) result.accepted_ids.insert(ranked[row][m].id);
    occ = next_occupancy(occ + chosen);
  }

  result.value = forced_value + best_total;

  Trace trace = replay_schedule(seq, initial, result.accepted_ids);
  if (trace.total_value() != result.value)
    throw std::logic_error("offline solver schedule does not replay to its value");
  result.schedule = trace.schedule;
  return result;
}

OptResult opt_dp(const ArrivalSequence& seq) {
  return opt_dp(seq, BufferState{{}, seq.capacity});
}

namespace {

struct Universe {
  std::vector<Packet> packets;  // initial residents first, then arrivals
  std::size_t initial_count = 0;
};

Universe collect_universe(const ArrivalSequence& seq, const BufferState& initial) {
  Universe u;
  u.packets.insert(u.packets.end(), initial.queue.begin(), initial.queue.end());
  u.initial_count = initial.queue.size();
  for (const auto& step : seq.steps)
    u.packets.insert(u.packets.end(), step.begin(), step.end());
  if (u.packets.size() > kBruteForceLimit)
    throw std::invalid_argument("instance too large for exhaustive enumeration (" +
                                std::to_string(u.packets.size()) + " packets)");
  return u;
}

// Enumerates every target subset, replays it and hands exact matches to the
// visitor as (target ids, transmitted arrival value, transmitted total).
template <typename Visit>
void enumerate_feasible(const ArrivalSequence& seq, const BufferState& initial,
                        const Universe& u, Visit visit) {
  const std::size_t n = u.packets.size();
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    std::unordered_set<PacketId> target;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ULL << i)) target.insert(u.packets[i].id);

    Trace trace;
    try {
      AcceptSetPolicy policy(target);
      trace = simulate(policy, seq, initial);
    } catch (const PolicyViolationError&) {
      continue;  // target not realizable
    }
    if (trace.schedule.entries.size() != target.size()) continue;
    bool exact = true;
    Value arrival_value = 0;
    for (const auto& e : trace.schedule.entries) {
      if (!target.count(e.packet.id)) {
        exact = false;
        break;
      }
    }
    if (!exact) continue;
    for (std::size_t i = u.initial_count; i < n; ++i)
      if (mask & (1ULL << i)) arrival_value += u.packets[i].value;
    visit(trace.total_value(), arrival_value);
  }
}

}  // namespace

Value opt_bruteforce(const ArrivalSequence& seq, const BufferState& initial) {
  validate_sequence(seq);
  validate_buffer(initial);
  Universe u = collect_universe(seq, initial);
  Value best = 0;
  enumerate_feasible(seq, initial, u,
                     [&](Value total, Value) { best = std::max(best, total); });
  return best;
}

Value opt_from_arrivals_only(const ArrivalSequence& seq, const BufferState& initial) {
  validate_sequence(seq);
  validate_buffer(initial);
  Universe u = collect_universe(seq, initial);
  Value best = 0;
  enumerate_feasible(seq, initial, u,
                     [&](Value, Value arrivals) { best = std::max(best, arrivals); });
  return best;
}

}  // namespace fifolap
