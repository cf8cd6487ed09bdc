#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <unordered_set>
#include <vector>

#include "fifolap/engine.hpp"
#include "fifolap/model.hpp"
#include "fifolap/offline.hpp"

namespace fifolap {

inline constexpr double kSqrt3 = 1.7320508075688772;
inline constexpr double kDefaultPgBeta = 2.0 + kSqrt3;

// Preemption threshold for the preemptive-greedy baseline.
struct PGParams {
  double beta = kDefaultPgBeta;
};

// Accept when there is room; otherwise replace the cheapest resident if the
// newcomer is strictly more valuable. Ties keep the resident.
PolicyDecision greedy_decide(const Packet& packet, const BufferState& buffer);

// Preemptive greedy: first discard the head-most resident q with
// beta * v(q) <= v(p) (at most one per arrival), then admit greedily.
PolicyDecision pg_decide(const Packet& packet, const BufferState& buffer,
                         const PGParams& params);

// Accept exactly the packets of a precomputed predicted-optimal set. If an
// acceptance would overflow (possible only under a wrong prediction), the
// cheapest resident is preempted when strictly cheaper, else the packet is
// dropped.
PolicyDecision follow_prediction_decide(const Packet& packet, const BufferState& buffer,
                                        const std::unordered_set<PacketId>& predicted_accept);

class GreedyPolicy : public Policy {
 public:
  PolicyDecision on_arrival(const Packet& packet, const BufferState& buffer,
                            int step) override;
};

class PgPolicy : public Policy {
 public:
  explicit PgPolicy(PGParams params = {});

  PolicyDecision on_arrival(const Packet& packet, const BufferState& buffer,
                            int step) override;

 private:
  PGParams params_;
};

class FollowPredictionPolicy : public Policy {
 public:
  explicit FollowPredictionPolicy(std::unordered_set<PacketId> predicted_accept)
      : predicted_accept_(std::move(predicted_accept)) {}

  PolicyDecision on_arrival(const Packet& packet, const BufferState& buffer,
                            int step) override;

 private:
  std::unordered_set<PacketId> predicted_accept_;
};

// Everything the guarded policy needs from a prediction: the canonical
// predicted-optimal set and its per-step cumulative values.
struct PredictionArtifacts {
  std::unordered_set<PacketId> accepted_ids;
  std::vector<Value> opt_prefix;  // opt_prefix[i] = predicted optimum through step i
  Value opt_total = 0;

  static PredictionArtifacts from_sequence(const ArrivalSequence& sigma_hat);

  Value prefix(int step) const;
};

enum class FallbackKind { kPreemptiveGreedy, kGreedy };

const char* fallback_name(FallbackKind kind);
double fallback_competitiveness(FallbackKind kind);  // sqrt(3) or 2

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

// Per-step record of the two switch checks, kept for reporting.
struct GuardCheck {
  int step = 0;
  Value predicted_prefix = 0;
  Value cum_alg = 0;
  Value alg_buffer_value = 0;  // resident value at the end of the step
  Value cum_baseline = 0;
  bool fired_prediction_check = false;
  bool fired_baseline_check = false;
};

// Follows the predicted optimal schedule while two end-of-step checks hold:
//   prediction-consistency: predicted prefix <= rho * transmitted-so-far
//   baseline-robustness:    virtual baseline prefix <= transmitted-so-far
//                           plus the resident (still deliverable) value
// On the first violation the physical buffer is cleared and a fresh fallback
// instance takes over permanently from the next step. A virtual baseline
// instance runs on the full input from step 1 regardless of switching.
//
// Comparing the baseline against transmitted value alone mistakes queueing
// delay for lost value: an optimal schedule that retains more packets
// transmits later, so its transmitted prefix can trail the baseline's even
// under an exact prediction (see the consistency tests for a concrete
// instance). Counting residents closes that gap; with an unreliable
// prediction the follower's buffer holds nothing, so the trigger behaves as
// before.
class GuardedPolicy : public Policy {
 public:
  GuardedPolicy(int capacity, PredictionArtifacts prediction, double rho,
                PolicyFactory fallback_factory, double fallback_beta);

  PolicyDecision on_arrival(const Packet& packet, const BufferState& buffer,
                            int step) override;
  StepSignal on_step_end(int step, const std::optional<Packet>& transmitted) override;

  bool switched() const { return switched_; }
  // t*: first step handled by the fallback; 0 when no switch occurred.
  int switch_step() const { return switch_step_; }
  Value cum_alg() const { return cum_alg_; }
  Value cum_baseline() const { return cum_baseline_; }
  const std::vector<GuardCheck>& check_log() const { return checks_; }

 private:
  int capacity_;
  PredictionArtifacts prediction_;
  double rho_;
  PolicyFactory fallback_factory_;
  FollowPredictionPolicy follow_;
  std::unique_ptr<Policy> virtual_baseline_;
  BufferState virtual_buffer_;
  BufferState physical_mirror_;  // resynced from the engine's view each arrival
  std::unique_ptr<Policy> fallback_;
  bool switched_ = false;
  int switch_step_ = 0;
  Value cum_alg_ = 0;
  Value cum_baseline_ = 0;
  std::vector<GuardCheck> checks_;
};

// rho must lie in [1, sqrt(3)] for the preemptive-greedy fallback and
// [1, 2] for the greedy fallback.
std::unique_ptr<GuardedPolicy> make_guarded(int capacity, PredictionArtifacts prediction,
                                            double rho, FallbackKind fallback,
                                            PGParams pg_params = {});

// Policy selection by name: "greedy", "pg", "follow", "guarded:pg",
// "guarded:greedy". The last three require prediction artifacts.
std::unique_ptr<Policy> make_policy(const std::string& name, int capacity,
                                    const PredictionArtifacts* prediction,
                                    double rho = kSqrt3, PGParams pg_params = {});

}  // namespace fifolap
