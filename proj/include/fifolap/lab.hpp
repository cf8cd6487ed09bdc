#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fifolap/metrics.hpp"
#include "fifolap/model.hpp"
#include "fifolap/policies.hpp"

namespace fifolap {

// Deterministic splittable generator; identical streams on every platform.
std::uint64_t splitmix64(std::uint64_t& state);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed + 0x9E3779B97F4A7C15ULL) {}
  // Independent substream for (seed, index) pairs.
  static Rng substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next();
  // Uniform integer in [lo, hi], inclusive.
  std::int64_t range(std::int64_t lo, std::int64_t hi);
  double real01();
  bool chance(double p);

 private:
  std::uint64_t state_;
};

struct GenConfig {
  int T = 10;
  int capacity = 2;

  enum class ArrivalsKind { kFixed, kUniformRange };
  ArrivalsKind arrivals_kind = ArrivalsKind::kFixed;
  int arrivals_fixed = 2;
  int arrivals_min = 0;
  int arrivals_max = 3;

  enum class ValueKind { kUniform, kTwoPoint };
  ValueKind value_kind = ValueKind::kUniform;
  Value value_lo = 1;
  Value value_hi = 100;
  Value big_value = 1000;  // two-point: values are 1 or big_value
  double big_prob = 0.1;

  std::uint64_t seed = 0;
};

// Seed-deterministic instance; ids are assigned in arrival order from 1.
ArrivalSequence generate(const GenConfig& cfg);

struct NoiseModel {
  enum class Kind {
    kNone,
    kValueNoise,
    kDrop,
    kInsert,
    kShift,
    kAdversarialEmpty,
    kAdversarialInflate,
  };

  Kind kind = Kind::kNone;
  double prob = 0.0;        // value-noise / drop / insert / shift
  double magnitude = 2.0;   // value-noise multiplier range [1/m, m]
  Value insert_value_lo = 1;
  Value insert_value_hi = 100;
  int max_shift = 1;
  Value inflate_factor = 2;
  std::uint64_t seed = 0;
};

// Derives a prediction over the shared id universe; kNone returns the input
// byte-identically.
ArrivalSequence perturb(const ArrivalSequence& sigma, const NoiseModel& noise);

struct ExperimentConfig {
  double rho = kSqrt3;
  double pg_beta = kDefaultPgBeta;
  std::vector<FallbackKind> fallbacks = {FallbackKind::kPreemptiveGreedy};
  // When true, instances within the brute-force guard are cross-checked
  // against the enumeration oracle.
  bool oracle_checks = false;
};

// Runs the optimal solver, both baselines, the prediction follower and the
// guarded policy (one run per configured fallback) on one instance; every
// trace passes the structural validator. Returns one record per fallback.
std::vector<RunRecord> run_experiment(const ArrivalSequence& sigma,
                                      const ArrivalSequence& sigma_hat,
                                      const ExperimentConfig& cfg,
                                      const std::string& instance_id,
                                      std::uint64_t seed);

enum class SweepAxis { kEtaNoise, kRho, kT };

SweepAxis sweep_axis_from_name(const std::string& name);

struct SweepConfig {
  SweepAxis axis = SweepAxis::kEtaNoise;
  std::vector<double> grid;
  GenConfig base;
  NoiseModel noise;
  int instances_per_point = 20;
  ExperimentConfig experiment;
  std::uint64_t seed = 0;
};

// Emits one CSV row per (grid point, instance) followed by one aggregate row
// per grid point. Aggregate rows fill the trailing agg_* columns.
void sweep(const SweepConfig& cfg, std::ostream& out);

std::string sweep_csv_header();

// ---------------------------------------------------------------------------
// Verification suites (exposed through the `verify` CLI subcommand).

struct VerifyScale {
  int oracle_instances = 500;
  int comparison_pairs = 1000;
  int invariant_instances = 400;
};

VerifyScale verify_scale(const std::string& name);  // "small" | "full"

struct SuiteResult {
  std::string name;
  bool passed = true;
  int checks = 0;
  int failures = 0;
  std::string detail;
};

SuiteResult verify_oracle_equivalence(int instances, std::uint64_t seed);
SuiteResult verify_opt_comparison_bounds(int pairs, std::uint64_t seed);
SuiteResult verify_arrivals_only_dominance(int pairs, std::uint64_t seed);
SuiteResult verify_engine_invariants(int instances, std::uint64_t seed);

std::vector<SuiteResult> run_verification(const VerifyScale& scale, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Config / file plumbing shared by the CLI and tests.

GenConfig gen_config_from_json(const std::string& text);
NoiseModel noise_model_from_json(const std::string& text);

ArrivalSequence load_sequence(const std::string& path);
void save_sequence(const std::string& path, const ArrivalSequence& seq);

// Worker cap: FIFOLAP_THREADS, 0 or unset = hardware concurrency.
int worker_count();

// Runs fn(0..n-1) on the worker pool; results must be written by index.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace fifolap
