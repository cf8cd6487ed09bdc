#pragma once

#include <set>
#include <unordered_set>

#include "fifolap/engine.hpp"
#include "fifolap/model.hpp"

namespace fifolap {

// Exact offline optimum together with a canonical transmitted set and a
// schedule that replays through the engine.
struct OptResult {
  Value value = 0;
  std::set<PacketId> accepted_ids;
  Schedule schedule;
};

// Replay policy: accepts exactly the target ids and discards any resident
// outside the target at the first opportunity.
class AcceptSetPolicy : public Policy {
 public:
  explicit AcceptSetPolicy(std::unordered_set<PacketId> target)
      : target_(std::move(target)) {}

  PolicyDecision on_arrival(const Packet& packet, const BufferState& buffer,
                            int step) override;

 private:
  std::unordered_set<PacketId> target_;
};

// Feeds the accepted set through the engine and returns the resulting trace.
Trace replay_schedule(const ArrivalSequence& seq, const BufferState& initial,
                      const std::set<PacketId>& accepted);

// Tie-break between equal-value optima. kPreferMore is the canonical choice
// (largest per-step acceptance count, ties to lower ids); kPreferFewer is the
// opposite pole, used to probe how sensitive downstream quantities are to the
// choice of optimal schedule.
enum class TieBreak { kPreferMore, kPreferFewer };

// Exact optimum by dynamic programming over (step, occupancy) states, with a
// deterministic tie-break. The result is always engine-replayable.
OptResult opt_dp(const ArrivalSequence& seq, const BufferState& initial,
                 TieBreak tie_break = TieBreak::kPreferMore);
OptResult opt_dp(const ArrivalSequence& seq);

inline constexpr std::size_t kBruteForceLimit = 22;

// Independent oracle: enumerates every accept/keep subset, replays each
// through the engine, keeps those whose transmitted set matches the target
// exactly, and returns the best transmitted value. Guarded to
// kBruteForceLimit packets (arrivals plus initial residents).
Value opt_bruteforce(const ArrivalSequence& seq, const BufferState& initial);

// Best total over arrival packets alone when starting from `initial`;
// residents may occupy slots or be discarded but never count. Same
// enumeration guard as opt_bruteforce.
Value opt_from_arrivals_only(const ArrivalSequence& seq, const BufferState& initial);

}  // namespace fifolap
