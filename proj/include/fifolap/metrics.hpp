#pragma once

#include <cstdint>
#include <string>

#include "fifolap/model.hpp"
#include "fifolap/offline.hpp"
#include "fifolap/policies.hpp"

namespace fifolap {

// Output-based prediction error: total value over the symmetric difference of
// the canonical optima, split into false positives (predicted-only, valued as
// predicted) and false negatives (true-only, valued as true). common_value is
// the id-intersection valued per the true sequence.
struct ErrorReport {
  Value eta = 0;
  Value false_positive_value = 0;  // D(sigma_hat, sigma)
  Value false_negative_value = 0;  // D(sigma, sigma_hat)
  Value common_value = 0;
};

ErrorReport prediction_error(const ArrivalSequence& sigma, const ArrivalSequence& sigma_hat);
ErrorReport prediction_error_from(const OptResult& true_opt, const OptResult& predicted_opt);

// eta depends on which optimal schedule is taken as canonical when values
// tie. This recomputes it under the opposite tie-break so the spread can be
// reported alongside the canonical number.
struct EtaSensitivity {
  Value eta_canonical = 0;
  Value eta_alternate = 0;
  Value spread() const {
    Value d = eta_canonical - eta_alternate;
    return d < 0 ? -d : d;
  }
};

EtaSensitivity prediction_error_sensitivity(const ArrivalSequence& sigma,
                                            const ArrivalSequence& sigma_hat);

struct BoundInputs {
  Value v_opt_true = 0;
  Value v_opt_pred = 0;
  Value v_alg = 0;
  Value v_pg = 0;
  Value v_greedy = 0;
  Value eta = 0;
  int switch_step = 0;                 // t*; 0 = no switch
  Value v_opt_buffer_at_switch = 0;    // optimal run's buffer value at step t*-1
  double rho = kSqrt3;
  FallbackKind fallback = FallbackKind::kPreemptiveGreedy;
};

// One experiment row. flag_a..flag_d are the per-run bound checks:
//   a: |v(OPT(sigma)) - v(OPT(sigma_hat))| <= eta
//   b: without a switch, OPT <= rho*ALG + eta and OPT <= sqrt(3)*ALG
//   c: with a switch, OPT <= beta*ALG + buffer-at-switch (beta per fallback)
//   d: OPT <= 2*GREEDY
struct RunRecord {
  std::string instance_id;
  std::uint64_t seed = 0;
  double rho = kSqrt3;
  FallbackKind fallback = FallbackKind::kPreemptiveGreedy;
  Value v_opt_true = 0;
  Value v_opt_pred = 0;
  Value v_alg = 0;
  Value v_pg = 0;
  Value v_greedy = 0;
  Value eta = 0;
  int switch_step = 0;
  Value v_opt_buf_switch = 0;
  double ratio = 1.0;
  double f_eta = 0.0;
  double robustness_bound = 0.0;
  bool flag_a = true;
  bool flag_b = true;
  bool flag_c = true;
  bool flag_d = true;

  // Extra fields carried for the harness, not part of the CSV row.
  Value v_follow = 0;
  bool baseline_check_fired = false;
};

// Relative tolerance applied to bounds with irrational factors; integer-factor
// bounds are checked exactly.
inline constexpr double kBoundTolerance = 1e-9;

RunRecord bound_suite(const BoundInputs& inputs);

// min(rho + eta/v_alg, cap), where cap is the fallback's competitive factor.
double smoothness_bound(double rho, Value eta, Value v_alg, double cap);

std::string run_record_csv_header();
std::string run_record_csv_row(const RunRecord& record);

}  // namespace fifolap
