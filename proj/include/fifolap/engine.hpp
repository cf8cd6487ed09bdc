#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "fifolap/model.hpp"

namespace fifolap {

// What a policy does with one arriving packet: discard the listed residents,
// then accept or drop the packet itself. Preemption is only available here,
// attached to an arrival.
struct PolicyDecision {
  enum class Action { kAccept, kReject };

  Action action = Action::kReject;
  std::vector<PacketId> preemptions;

  static PolicyDecision accept() { return {Action::kAccept, {}}; }
  static PolicyDecision accept_after(std::vector<PacketId> preempt) {
    return {Action::kAccept, std::move(preempt)};
  }
  static PolicyDecision reject() { return {Action::kReject, {}}; }
};

// Signal a policy may raise at the end of a step; kSwitchAndClear makes the
// engine discard every resident packet before the next step begins.
enum class StepSignal { kContinue, kSwitchAndClear };

// Online admission policy. Decisions may depend on the arriving packet, the
// current buffer, the step index and the policy's own state only; the engine
// never exposes future arrivals.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual PolicyDecision on_arrival(const Packet& packet, const BufferState& buffer,
                                    int step) = 0;

  // Called once per step after the transmission phase, with the transmitted
  // packet if any. Also runs for steps without arrivals.
  virtual StepSignal on_step_end(int step, const std::optional<Packet>& transmitted) {
    (void)step;
    (void)transmitted;
    return StepSignal::kContinue;
  }
};

class PolicyViolationError : public std::runtime_error {
 public:
  PolicyViolationError(const std::string& what, int step, PacketId packet)
      : std::runtime_error(what), step(step), packet(packet) {}

  int step;
  PacketId packet;
};

// Removes the head packet, if any. An empty buffer is a no-op and yields no
// packet.
std::pair<BufferState, std::optional<Packet>> transmit_head(BufferState buffer);

// Applies preemptions (survivor order preserved) and, on accept, enqueues the
// packet at the tail. Throws PolicyViolationError for absent preemption ids or
// acceptance into a full buffer.
BufferState apply_decision(BufferState buffer, const Packet& packet,
                           const PolicyDecision& decision, int step = 0);

// Runs the two-phase step loop: each arrival of step i is offered to the
// policy one at a time, then the head packet (if any) is transmitted.
// Packets left in the buffer after the last step contribute nothing.
Trace simulate(Policy& policy, const ArrivalSequence& seq, BufferState initial);
Trace simulate(Policy& policy, const ArrivalSequence& seq);

// One JSON object per step:
//   {"step": i, "transmitted": id|null, "cum_value": v, "buffer": [ids]}
std::string trace_to_jsonl(const Trace& trace);

// Structural checks on a finished trace: occupancy bounds, FIFO transmission
// order, arrival-before-transmission, one transmission per step and exact
// cumulative-value reconciliation. Throws ValidationError on any violation.
void validate_trace(const Trace& trace, const ArrivalSequence& seq,
                    const BufferState& initial);

}  // namespace fifolap
