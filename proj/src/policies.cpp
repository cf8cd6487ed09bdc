#include "fifolap/policies.hpp"

#include <algorithm>
#include <stdexcept>

namespace fifolap {

namespace {

// Cheapest resident; ties go to the packet closest to the head.
int min_value_index(const BufferState& buffer) {
  int best = -1;
  for (int i = 0; i < buffer.occupancy(); ++i)
    if (best < 0 || buffer.queue[i].value < buffer.queue[best].value) best = i;
  return best;
}

}  // namespace

PolicyDecision greedy_decide(const Packet& packet, const BufferState& buffer) {
  if (!buffer.full()) return PolicyDecision::accept();
  int i = min_value_index(buffer);
  if (buffer.queue[i].value < packet.value)
    return PolicyDecision::accept_after({buffer.queue[i].id});
  return PolicyDecision::reject();
}

PolicyDecision pg_decide(const Packet& packet, const BufferState& buffer,
                         const PGParams& params) {
  if (params.beta <= 1.0) throw std::invalid_argument("pg beta must be > 1");

  // Proactive pass: drop the head-most resident dominated by a factor beta.
  for (int i = 0; i < buffer.occupancy(); ++i) {
    if (params.beta * static_cast<double>(buffer.queue[i].value) <=
        static_cast<double>(packet.value)) {
      // One slot is now free, so the packet is always admitted.
      return PolicyDecision::accept_after({buffer.queue[i].id});
    }
  }
  if (!buffer.full()) return PolicyDecision::accept();
  int i = min_value_index(buffer);
  if (buffer.queue[i].value < packet.value)
    return PolicyDecision::accept_after({buffer.queue[i].id});
  return PolicyDecision::reject();
}

PolicyDecision follow_prediction_decide(const Packet& packet, const BufferState& buffer,
                                        const std::unordered_set<PacketId>& predicted_accept) {
  if (!predicted_accept.count(packet.id)) return PolicyDecision::reject();
  if (!buffer.full()) return PolicyDecision::accept();
  // Only reachable under a wrong prediction; shed the cheapest resident if
  // that is a strict improvement.
  int i = min_value_index(buffer);
  if (buffer.queue[i].value < packet.value)
    return PolicyDecision::accept_after({buffer.queue[i].id});
  return PolicyDecision::reject();
}

PolicyDecision GreedyPolicy::on_arrival(const Packet& packet, const BufferState& buffer,
                                        int) {
  return greedy_decide(packet, buffer);
}

PgPolicy::PgPolicy(PGParams params) : params_(params) {
  if (params_.beta <= 1.0) throw std::invalid_argument("pg beta must be > 1");
}

PolicyDecision PgPolicy::on_arrival(const Packet& packet, const BufferState& buffer, int) {
  return pg_decide(packet, buffer, params_);
}

PolicyDecision FollowPredictionPolicy::on_arrival(const Packet& packet,
                                                  const BufferState& buffer, int) {
  return follow_prediction_decide(packet, buffer, predicted_accept_);
}

PredictionArtifacts PredictionArtifacts::from_sequence(const ArrivalSequence& sigma_hat) {
  OptResult opt = opt_dp(sigma_hat);
  PredictionArtifacts art;
  art.accepted_ids.insert(opt.accepted_ids.begin(), opt.accepted_ids.end());
  art.opt_total = opt.value;
  art.opt_prefix.assign(sigma_hat.step_count() + 1, 0);
  for (const auto& e : opt.schedule.entries)
    art.opt_prefix[e.step] += e.packet.value;
  for (std::size_t i = 1; i < art.opt_prefix.size(); ++i)
    art.opt_prefix[i] += art.opt_prefix[i - 1];
  return art;
}

Value PredictionArtifacts::prefix(int step) const {
  if (step <= 0 || opt_prefix.empty()) return 0;
  if (step >= static_cast<int>(opt_prefix.size())) return opt_total;
  return opt_prefix[step];
}

const char* fallback_name(FallbackKind kind) {
  switch (kind) {
    case FallbackKind::kPreemptiveGreedy: return "pg";
    case FallbackKind::kGreedy: return "greedy";
  }
  return "?";
}

double fallback_competitiveness(FallbackKind kind) {
  switch (kind) {
    case FallbackKind::kPreemptiveGreedy: return kSqrt3;
    case FallbackKind::kGreedy: return 2.0;
  }
  return kSqrt3;
}

GuardedPolicy::GuardedPolicy(int capacity, PredictionArtifacts prediction, double rho,
                             PolicyFactory fallback_factory, double fallback_beta)
    : capacity_(capacity),
      prediction_(std::move(prediction)),
      rho_(rho),
      fallback_factory_(std::move(fallback_factory)),
      follow_(prediction_.accepted_ids),
      virtual_buffer_{{}, capacity},
      physical_mirror_{{}, capacity} {
  if (capacity_ < 1) throw std::invalid_argument("capacity must be >= 1");
  if (rho_ < 1.0 || rho_ > fallback_beta)
    throw std::invalid_argument("rho outside the admissible range [1, " +
                                std::to_string(fallback_beta) + "]");
  virtual_baseline_ = fallback_factory_();
}

PolicyDecision GuardedPolicy::on_arrival(const Packet& packet, const BufferState& buffer,
                                         int step) {
  // The virtual baseline sees every arrival, switched or not.
  PolicyDecision vdec = virtual_baseline_->on_arrival(packet, virtual_buffer_, step);
  virtual_buffer_ = apply_decision(std::move(virtual_buffer_), packet, vdec, step);

  PolicyDecision decision = switched_ ? fallback_->on_arrival(packet, buffer, step)
                                      : follow_.on_arrival(packet, buffer, step);
  physical_mirror_ = buffer;
  physical_mirror_ = apply_decision(std::move(physical_mirror_), packet, decision, step);
  return decision;
}

StepSignal GuardedPolicy::on_step_end(int step, const std::optional<Packet>& transmitted) {
  auto [vb, vtx] = transmit_head(std::move(virtual_buffer_));
  virtual_buffer_ = std::move(vb);
  if (vtx) cum_baseline_ += vtx->value;
  virtual_baseline_->on_step_end(step, vtx);

  if (transmitted) cum_alg_ += transmitted->value;
  physical_mirror_ = transmit_head(std::move(physical_mirror_)).first;

  if (switched_) {
    fallback_->on_step_end(step, transmitted);
    return StepSignal::kContinue;
  }

  GuardCheck check;
  check.step = step;
  check.predicted_prefix = prediction_.prefix(step);
  check.cum_alg = cum_alg_;
  check.alg_buffer_value = physical_mirror_.total_value();
  check.cum_baseline = cum_baseline_;
  // Product form; no division so a zero denominator needs no special case.
  check.fired_prediction_check =
      static_cast<double>(check.predicted_prefix) > rho_ * static_cast<double>(cum_alg_);
  check.fired_baseline_check = cum_baseline_ > cum_alg_ + check.alg_buffer_value;
  checks_.push_back(check);

  if (check.fired_prediction_check || check.fired_baseline_check) {
    switched_ = true;
    switch_step_ = step + 1;
    fallback_ = fallback_factory_();
    physical_mirror_.queue.clear();
    return StepSignal::kSwitchAndClear;
  }
  return StepSignal::kContinue;
}

std::unique_ptr<GuardedPolicy> make_guarded(int capacity, PredictionArtifacts prediction,
                                            double rho, FallbackKind fallback,
                                            PGParams pg_params) {
  PolicyFactory factory;
  switch (fallback) {
    case FallbackKind::kPreemptiveGreedy:
      factory = [pg_params] { return std::make_unique<PgPolicy>(pg_params); };
      break;
    case FallbackKind::kGreedy:
      factory = [] { return std::make_unique<GreedyPolicy>(); };
      break;
  }
  return std::make_unique<GuardedPolicy>(capacity, std::move(prediction), rho,
                                         std::move(factory),
                                         fallback_competitiveness(fallback));
}

std::unique_ptr<Policy> make_policy(const std::string& name, int capacity,
                                    const PredictionArtifacts* prediction, double rho,
                                    PGParams pg_params) {
  if (name == "greedy") return std::make_unique<GreedyPolicy>();
  if (name == "pg") return std::make_unique<PgPolicy>(pg_params);
  if (name == "follow" || name == "guarded:pg" || name == "guarded:greedy") {
    if (prediction == nullptr)
      throw std::invalid_argument("policy \"" + name + "\" needs prediction artifacts");
    if (name == "follow")
      return std::make_unique<FollowPredictionPolicy>(prediction->accepted_ids);
    FallbackKind fb =
        name == "guarded:pg" ? FallbackKind::kPreemptiveGreedy : FallbackKind::kGreedy;
    return make_guarded(capacity, *prediction, rho, fb, pg_params);
  }
  throw std::invalid_argument("unknown policy: " + name);
}

}  // namespace fifolap
