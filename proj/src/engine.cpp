#include "fifolap/engine.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fifolap {

std::pair<BufferState, std::optional<Packet>> transmit_head(BufferState buffer) {
  if (buffer.queue.empty()) return {std::move(buffer), std::nullopt};
  Packet head = buffer.queue.front();
  buffer.queue.erase(buffer.queue.begin());
  return {std::move(buffer), head};
}

BufferState apply_decision(BufferState buffer, const Packet& packet,
                           const PolicyDecision& decision, int step) {
  for (PacketId id : decision.preemptions) {
    auto it = std::find_if(buffer.queue.begin(), buffer.queue.end(),
                           [id](const Packet& q) { return q.id == id; });
    if (it == buffer.queue.end())
      throw PolicyViolationError("preempting id " + std::to_string(id) +
                                     " not resident (step " + std::to_string(step) + ")",
                                 step, id);
    buffer.queue.erase(it);
  }
  if (decision.action == PolicyDecision::Action::kAccept) {
    if (buffer.full())
      throw PolicyViolationError("accepting id " + std::to_string(packet.id) +
                                     " into a full buffer (step " + std::to_string(step) + ")",
                                 step, packet.id);
    buffer.queue.push_back(packet);
  }
  return buffer;
}

Trace simulate(Policy& policy, const ArrivalSequence& seq, BufferState initial) {
  validate_sequence(seq);
  validate_buffer(initial);
  if (initial.capacity != seq.capacity)
    throw ValidationError("initial buffer capacity does not match the sequence");
  for (const auto& resident : initial.queue) {
    for (const auto& step : seq.steps)
      for (const auto& p : step)
        if (p.id == resident.id)
          throw ValidationError("resident id " + std::to_string(p.id) +
                                " collides with an arrival");
  }

  BufferState buffer = std::move(initial);
  Trace trace;
  Value cumulative = 0;
  for (int step = 1; step <= seq.step_count(); ++step) {
    for (const Packet& packet : seq.steps[step - 1]) {
      PolicyDecision decision = policy.on_arrival(packet, buffer, step);
      buffer = apply_decision(std::move(buffer), packet, decision, step);
    }

    StepRecord record;
    record.step = step;
    record.buffer_after_arrivals = buffer.queue;

    auto [next, transmitted] = transmit_head(std::move(buffer));
    buffer = std::move(next);
    if (transmitted) {
      cumulative += transmitted->value;
      trace.schedule.entries.push_back({step, *transmitted});
    }
    record.transmitted = transmitted;
    record.cumulative_value = cumulative;
    trace.records.push_back(std::move(record));

    if (policy.on_step_end(step, transmitted) == StepSignal::kSwitchAndClear)
      buffer.queue.clear();
  }
  return trace;
}

Trace simulate(Policy& policy, const ArrivalSequence& seq) {
  return simulate(policy, seq, BufferState{{}, seq.capacity});
}

std::string trace_to_jsonl(const Trace& trace) {
  std::ostringstream out;
  for (const auto& r : trace.records) {
    out << "{\"step\": " << r.step << ", \"transmitted\": ";
    if (r.transmitted)
      out << r.transmitted->id;
    else
      out << "null";
    out << ", \"cum_value\": " << r.cumulative_value << ", \"buffer\": [";
    for (std::size_t i = 0; i < r.buffer_after_arrivals.size(); ++i) {
      if (i) out << ", ";
      out << r.buffer_after_arrivals[i].id;
    }
    out << "]}\n";
  }
  return out.str();
}

void validate_trace(const Trace& trace, const ArrivalSequence& seq,
                    const BufferState& initial) {
  // Arrival order: initial residents first, then arrivals step by step.
  std::vector<PacketId> order;
  std::unordered_map<PacketId, int> arrival_step;
  for (const auto& p : initial.queue) {
    order.push_back(p.id);
    arrival_step[p.id] = 0;
  }
  for (int s = 1; s <= seq.step_count(); ++s) {
    for (const auto& p : seq.steps[s - 1]) {
      order.push_back(p.id);
      arrival_step[p.id] = s;
    }
  }

  if (static_cast<int>(trace.records.size()) != seq.step_count())
    throw ValidationError("trace does not cover every step");

  Value cumulative = 0;
  std::size_t schedule_idx = 0;
  for (int s = 1; s <= seq.step_count(); ++s) {
    const StepRecord& r = trace.records[s - 1];
    if (r.step != s) throw ValidationError("trace steps out of order");
    if (static_cast<int>(r.buffer_after_arrivals.size()) > seq.capacity)
      throw ValidationError("occupancy above capacity at step " + std::to_string(s));
    if (r.transmitted) {
      if (r.buffer_after_arrivals.empty() ||
          r.buffer_after_arrivals.front().id != r.transmitted->id)
        throw ValidationError("transmission is not the buffer head at step " +
                              std::to_string(s));
      auto it = arrival_step.find(r.transmitted->id);
      if (it == arrival_step.end())
        throw ValidationError("transmitted unknown id at step " + std::to_string(s));
      if (it->second > s)
        throw ValidationError("packet transmitted before its arrival at step " +
                              std::to_string(s));
      cumulative += r.transmitted->value;
      if (schedule_idx >= trace.schedule.entries.size() ||
          trace.schedule.entries[schedule_idx].step != s ||
          trace.schedule.entries[schedule_idx].packet.id != r.transmitted->id)
        throw ValidationError("schedule does not reconcile with step records");
      ++schedule_idx;
    } else if (!r.buffer_after_arrivals.empty()) {
      throw ValidationError("missed transmission from a non-empty buffer at step " +
                            std::to_string(s));
    }
    if (r.cumulative_value != cumulative)
      throw ValidationError("cumulative value mismatch at step " + std::to_string(s));
  }
  if (schedule_idx != trace.schedule.entries.size())
    throw ValidationError("schedule has entries beyond the trace");

  // Transmissions must form a subsequence of the arrival order.
  std::size_t pos = 0;
  for (const auto& e : trace.schedule.entries) {
    while (pos < order.size() && order[pos] != e.packet.id) ++pos;
    if (pos == order.size())
      throw ValidationError("transmissions violate FIFO order (id " +
                            std::to_string(e.packet.id) + ")");
    ++pos;
  }
}

}  // namespace fifolap
