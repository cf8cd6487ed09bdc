#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fifolap {

using PacketId = std::int64_t;
using Value = std::int64_t;

// A valued unit of work. Ids are unique within a sequence and shared across a
// true sequence and its prediction to identify the same logical packet.
struct Packet {
  PacketId id = 0;
  Value value = 0;

  friend bool operator==(const Packet&, const Packet&) = default;
};

// The full input: a buffer capacity plus one ordered arrival list per step.
// Steps are 1-based everywhere in this library; steps[i] holds step i+1.
struct ArrivalSequence {
  int capacity = 1;
  std::vector<std::vector<Packet>> steps;

  int step_count() const { return static_cast<int>(steps.size()); }
  std::size_t packet_count() const;
  Value max_value() const;
};

// Bounded FIFO queue, head first (next to transmit).
struct BufferState {
  std::vector<Packet> queue;
  int capacity = 1;

  int occupancy() const { return static_cast<int>(queue.size()); }
  bool full() const { return occupancy() >= capacity; }
  bool empty() const { return queue.empty(); }
  Value total_value() const;
  bool contains(PacketId id) const;
};

struct ScheduleEntry {
  int step = 0;
  Packet packet;

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

// Transmitted packets with their transmission steps; at most one per step,
// step indices strictly increasing.
struct Schedule {
  std::vector<ScheduleEntry> entries;

  Value total_value() const;
};

enum class PrefixMode { kBefore, kUpTo, kAfter, kFrom };  // <, <=, >, >=

// Sum of entry values whose step satisfies `mode` relative to `step`.
Value prefix_value(const Schedule& schedule, int step, PrefixMode mode);

// One record per simulated step. The buffer snapshot is taken after the
// arrival phase, i.e. just before the transmission of that step.
struct StepRecord {
  int step = 0;
  std::vector<Packet> buffer_after_arrivals;
  std::optional<Packet> transmitted;
  Value cumulative_value = 0;
};

struct Trace {
  std::vector<StepRecord> records;
  Schedule schedule;

  Value total_value() const;
  // Cumulative transmitted value through `step` (0 for step <= 0, total
  // beyond the last step).
  Value value_through(int step) const;
  // Total value resident in the buffer after the arrival phase of `step`.
  Value buffer_value_after_arrivals(int step) const;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Throws ValidationError identifying the offending location; otherwise
// returns its argument unchanged.
const ArrivalSequence& validate_sequence(const ArrivalSequence& seq);
const BufferState& validate_buffer(const BufferState& buffer);

// Canonical JSON form: {"capacity": int, "steps": [[{"id":..,"value":..}..]..]}
// with keys emitted in exactly that order.
std::string sequence_to_json(const ArrivalSequence& seq);
ArrivalSequence sequence_from_json(const std::string& text);

}  // namespace fifolap
