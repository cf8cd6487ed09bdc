#include "fifolap/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

namespace fifolap {

namespace {

std::unordered_map<PacketId, Value> value_by_id(const OptResult& opt) {
  std::unordered_map<PacketId, Value> m;
  for (const auto& e : opt.schedule.entries) m[e.packet.id] = e.packet.value;
  return m;
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace

ErrorReport prediction_error_from(const OptResult& true_opt, const OptResult& predicted_opt) {
  auto true_values = value_by_id(true_opt);
  auto pred_values = value_by_id(predicted_opt);

  ErrorReport report;
  for (const auto& [id, value] : pred_values) {
    if (!true_values.count(id)) report.false_positive_value += value;
  }
  for (const auto& [id, value] : true_values) {
    if (!pred_values.count(id))
      report.false_negative_value += value;
    else
      report.common_value += value;  // valued per the true sequence
  }
  report.eta = report.false_positive_value + report.false_negative_value;
  return report;
}

ErrorReport prediction_error(const ArrivalSequence& sigma, const ArrivalSequence& sigma_hat) {
  validate_sequence(sigma);
  validate_sequence(sigma_hat);
  return prediction_error_from(opt_dp(sigma), opt_dp(sigma_hat));
}

EtaSensitivity prediction_error_sensitivity(const ArrivalSequence& sigma,
                                            const ArrivalSequence& sigma_hat) {
  validate_sequence(sigma);
  validate_sequence(sigma_hat);
  const BufferState empty_true{{}, sigma.capacity};
  const BufferState empty_pred{{}, sigma_hat.capacity};
  EtaSensitivity s;
  s.eta_canonical = prediction_error_from(opt_dp(sigma, empty_true, TieBreak::kPreferMore),
                                          opt_dp(sigma_hat, empty_pred, TieBreak::kPreferMore))
                        .eta;
  s.eta_alternate = prediction_error_from(opt_dp(sigma, empty_true, TieBreak::kPreferFewer),
                                          opt_dp(sigma_hat, empty_pred, TieBreak::kPreferFewer))
                        .eta;
  return s;
}

double smoothness_bound(double rho, Value eta, Value v_alg, double cap) {
  if (v_alg <= 0) return cap;
  return std::min(rho + static_cast<double>(eta) / static_cast<double>(v_alg), cap);
}

RunRecord bound_suite(const BoundInputs& in) {
  RunRecord r;
  r.rho = in.rho;
  r.fallback = in.fallback;
  r.v_opt_true = in.v_opt_true;
  r.v_opt_pred = in.v_opt_pred;
  r.v_alg = in.v_alg;
  r.v_pg = in.v_pg;
  r.v_greedy = in.v_greedy;
  r.eta = in.eta;
  r.switch_step = in.switch_step;
  r.v_opt_buf_switch = in.v_opt_buffer_at_switch;

  const double beta = fallback_competitiveness(in.fallback);
  const double alg = static_cast<double>(in.v_alg);
  const double opt = static_cast<double>(in.v_opt_true);
  const double tol = kBoundTolerance * alg;

  if (in.v_alg > 0)
    r.ratio = opt / alg;
  else
    r.ratio = in.v_opt_true > 0 ? std::numeric_limits<double>::infinity() : 1.0;

  r.f_eta = smoothness_bound(in.rho, in.eta, in.v_alg, beta);
  r.robustness_bound =
      in.v_alg > 0 ? beta + static_cast<double>(in.v_opt_buffer_at_switch) / alg
                   : std::numeric_limits<double>::infinity();

  Value diff = in.v_opt_true - in.v_opt_pred;
  if (diff < 0) diff = -diff;
  r.flag_a = diff <= in.eta;

  if (in.switch_step == 0) {
    bool smooth = opt <= in.rho * alg + static_cast<double>(in.eta) + tol;
    bool capped = opt <= kSqrt3 * alg + tol;
    r.flag_b = smooth && capped;
    r.flag_c = true;
  } else {
    r.flag_b = true;
    if (in.fallback == FallbackKind::kGreedy) {
      // Integer factor: exact arithmetic.
      r.flag_c = in.v_opt_true <= 2 * in.v_alg + in.v_opt_buffer_at_switch;
    } else {
      r.flag_c =
          opt <= beta * alg + static_cast<double>(in.v_opt_buffer_at_switch) + tol;
    }
  }

  r.flag_d = in.v_opt_true <= 2 * in.v_greedy;
  return r;
}

std::string run_record_csv_header() {
  return "instance_id,seed,rho,fallback,v_opt_true,v_opt_pred,v_alg,v_pg,v_greedy,"
         "eta,switch_step,v_opt_buf_switch,ratio,f_eta,flag_a,flag_b,flag_c,flag_d";
}

std::string run_record_csv_row(const RunRecord& r) {
  std::string row;
  row += r.instance_id;
  row += ',';
  row += std::to_string(r.seed);
  row += ',';
  row += format_double(r.rho);
  row += ',';
  row += fallback_name(r.fallback);
  row += ',';
  row += std::to_string(r.v_opt_true);
  row += ',';
  row += std::to_string(r.v_opt_pred);
  row += ',';
  row += std::to_string(r.v_alg);
  row += ',';
  row += std::to_string(r.v_pg);
  row += ',';
  row += std::to_string(r.v_greedy);
  row += ',';
  row += std::to_string(r.eta);
  row += ',';
  row += std::to_string(r.switch_step);
  row += ',';
  row += std::to_string(r.v_opt_buf_switch);
  row += ',';
  row += format_double(r.ratio);
  row += ',';
  row += format_double(r.f_eta);
  row += ',';
  row += r.flag_a ? '1' : '0';
  row += ',';
  row += r.flag_b ? '1' : '0';
  row += ',';
  row += r.flag_c ? '1' : '0';
  row += ',';
  row += r.flag_d ? '1' : '0';
  return row;
}

}  // namespace fifolap
