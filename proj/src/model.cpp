#include "fifolap/model.hpp"

#include <algorithm>
#include <unordered_set>

#include "json.hpp"

namespace fifolap {

std::size_t ArrivalSequence::packet_count() const {
  std::size_t n = 0;
  for (const auto& step : steps) n += step.size();
  return n;
}

Value ArrivalSequence::max_value() const {
  Value best = 0;
  for (const auto& step : steps)
    for (const auto& p : step) best = std::max(best, p.value);
  return best;
}

Value BufferState::total_value() const {
  Value sum = 0;
  for (const auto& p : queue) sum += p.value;
  return sum;
}

bool BufferState::contains(PacketId id) const {
  return std::any_of(queue.begin(), queue.end(),
                     [id](const Packet& p) { return p.id == id; });
}

Value Schedule::total_value() const {
  Value sum = 0;
  for (const auto& e : entries) sum += e.packet.value;
  return sum;
}

Value prefix_value(const Schedule& schedule, int step, PrefixMode mode) {
  Value sum = 0;
  for (const auto& e : schedule.entries) {
    bool keep = false;
    switch (mode) {
      case PrefixMode::kBefore: keep = e.step < step; break;
      case PrefixMode::kUpTo: keep = e.step <= step; break;
      case PrefixMode::kAfter: keep = e.step > step; break;
      case PrefixMode::kFrom: keep = e.step >= step; break;
    }
    if (keep) sum += e.packet.value;
  }
  return sum;
}

Value Trace::total_value() const {
  return records.empty() ? 0 : records.back().cumulative_value;
}

Value Trace::value_through(int step) const {
  if (step <= 0 || records.empty()) return 0;
  int idx = std::min<int>(step, static_cast<int>(records.size())) - 1;
  return records[idx].cumulative_value;
}

Value Trace::buffer_value_after_arrivals(int step) const {
  if (step < 1 || step > static_cast<int>(records.size())) return 0;
  Value sum = 0;
  for (const auto& p : records[step - 1].buffer_after_arrivals) sum += p.value;
  return sum;
}

const ArrivalSequence& validate_sequence(const ArrivalSequence& seq) {
  if (seq.capacity < 1) throw ValidationError("capacity must be >= 1");
  std::unordered_set<PacketId> seen;
  for (std::size_t s = 0; s < seq.steps.size(); ++s) {
    for (const auto& p : seq.steps[s]) {
      if (p.id < 0)
        throw ValidationError("negative id " + std::to_string(p.id) + " at step " +
                              std::to_string(s + 1));
      if (p.value < 1)
        throw ValidationError("non-positive value for id " + std::to_string(p.id) +
                              " at step " + std::to_string(s + 1));
      if (!seen.insert(p.id).second)
        throw ValidationError("duplicate id " + std::to_string(p.id) + " at step " +
                              std::to_string(s + 1));
    }
  }
  return seq;
}

const BufferState& validate_buffer(const BufferState& buffer) {
  if (buffer.capacity < 1) throw ValidationError("capacity must be >= 1");
  if (buffer.occupancy() > buffer.capacity)
    throw ValidationError("buffer over capacity");
  std::unordered_set<PacketId> seen;
  for (const auto& p : buffer.queue) {
    if (p.value < 1)
      throw ValidationError("non-positive value for resident id " + std::to_string(p.id));
    if (!seen.insert(p.id).second)
      throw ValidationError("duplicate resident id " + std::to_string(p.id));
  }
  return buffer;
}

std::string sequence_to_json(const ArrivalSequence& seq) {
  nlohmann::ordered_json j;
  j["capacity"] = seq.capacity;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& step : seq.steps) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : step) {
      nlohmann::ordered_json pj;
      pj["id"] = p.id;
      pj["value"] = p.value;
      arr.push_back(std::move(pj));
    }
    steps.push_back(std::move(arr));
  }
  j["steps"] = std::move(steps);
  return j.dump(2) + "\n";
}

ArrivalSequence sequence_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad instance JSON: ") + e.what());
  }
  ArrivalSequence seq;
  if (!j.contains("capacity") || !j.contains("steps"))
    throw ValidationError("instance JSON needs \"capacity\" and \"steps\"");
  seq.capacity = j.at("capacity").get<int>();
  for (const auto& step : j.at("steps")) {
    std::vector<Packet> packets;
    for (const auto& pj : step) {
      Packet p;
      p.id = pj.at("id").get<PacketId>();
      p.value = pj.at("value").get<Value>();
      packets.push_back(p);
    }
    seq.steps.push_back(std::move(packets));
  }
  validate_sequence(seq);
  return seq;
}

}  // namespace fifolap
