#include "fifolap/lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "fifolap/engine.hpp"
#include "fifolap/offline.hpp"

namespace fifolap {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state) ^ (0xA0761D6478BD642FULL * (index + 1));
  return Rng(mixed);
}

std::uint64_t Rng::next() { return splitmix64(state_); }

std::int64_t Rng::range(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw std::invalid_argument("empty range");
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
  return lo + static_cast<std::int64_t>(
                  (static_cast<unsigned __int128>(next()) * span) >> 64);
}

double Rng::real01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

bool Rng::chance(double p) { return real01() < p; }

ArrivalSequence generate(const GenConfig& cfg) {
  if (cfg.T < 0 || cfg.capacity < 1) throw std::invalid_argument("bad generator config");
  if (cfg.arrivals_kind == GenConfig::ArrivalsKind::kUniformRange &&
      (cfg.arrivals_min > cfg.arrivals_max || cfg.arrivals_min < 0))
    throw std::invalid_argument("bad arrivals range");
  if (cfg.value_kind == GenConfig::ValueKind::kUniform &&
      (cfg.value_lo < 1 || cfg.value_lo > cfg.value_hi))
    throw std::invalid_argument("bad value range");
  if (cfg.value_kind == GenConfig::ValueKind::kTwoPoint && cfg.big_value < 1)
    throw std::invalid_argument("bad two-point value");

  Rng rng(cfg.seed);
  ArrivalSequence seq;
  seq.capacity = cfg.capacity;
  seq.steps.resize(cfg.T);
  PacketId next_id = 1;
  for (int s = 0; s < cfg.T; ++s) {
    int k = cfg.arrivals_kind == GenConfig::ArrivalsKind::kFixed
                ? cfg.arrivals_fixed
                : static_cast<int>(rng.range(cfg.arrivals_min, cfg.arrivals_max));
    for (int i = 0; i < k; ++i) {
      Packet p;
      p.id = next_id++;
      if (cfg.value_kind == GenConfig::ValueKind::kUniform)
        p.value = rng.range(cfg.value_lo, cfg.value_hi);
      else
        p.value = rng.chance(cfg.big_prob) ? cfg.big_value : 1;
      seq.steps[s].push_back(p);
    }
  }
  return seq;
}

ArrivalSequence perturb(const ArrivalSequence& sigma, const NoiseModel& noise) {
  validate_sequence(sigma);
  if (noise.kind == NoiseModel::Kind::kNone) return sigma;

  if (noise.kind == NoiseModel::Kind::kAdversarialEmpty) {
    ArrivalSequence out;
    out.capacity = sigma.capacity;
    out.steps.resize(sigma.step_count());
    return out;
  }

  Rng rng(noise.seed);
  ArrivalSequence out;
  out.capacity = sigma.capacity;
  out.steps.resize(sigma.step_count());

  PacketId fresh_id = 0;
  for (const auto& step : sigma.steps)
    for (const auto& p : step) fresh_id = std::max(fresh_id, p.id);
  ++fresh_id;

  const int T = sigma.step_count();
  for (int s = 0; s < T; ++s) {
    for (const Packet& p : sigma.steps[s]) {
      switch (noise.kind) {
        case NoiseModel::Kind::kValueNoise: {
          Packet q = p;
          if (rng.chance(noise.prob)) {
            double lo = 1.0 / noise.magnitude;
            double mult = lo + rng.real01() * (noise.magnitude - lo);
            q.value = std::max<Value>(1, std::llround(static_cast<double>(p.value) * mult));
          }
          out.steps[s].push_back(q);
          break;
        }
        case NoiseModel::Kind::kDrop:
          if (!rng.chance(noise.prob)) out.steps[s].push_back(p);
          break;
        case NoiseModel::Kind::kShift: {
          int target = s;
          if (rng.chance(noise.prob) && T > 0) {
            int delta = static_cast<int>(rng.range(-noise.max_shift, noise.max_shift));
            target = std::clamp(s + delta, 0, T - 1);
          }
          out.steps[target].push_back(p);
          break;
        }
        case NoiseModel::Kind::kAdversarialInflate: {
          Packet q = p;
          q.value = p.value * noise.inflate_factor;
          out.steps[s].push_back(q);
          break;
        }
        default:
          out.steps[s].push_back(p);
          break;
      }
    }
    if (noise.kind == NoiseModel::Kind::kInsert && rng.chance(noise.prob)) {
      Packet p;
      p.id = fresh_id++;
      p.value = rng.range(noise.insert_value_lo, noise.insert_value_hi);
      out.steps[s].push_back(p);
    }
  }
  validate_sequence(out);
  return out;
}

std::vector<RunRecord> run_experiment(const ArrivalSequence& sigma,
                                      const ArrivalSequence& sigma_hat,
                                      const ExperimentConfig& cfg,
                                      const std::string& instance_id,
                                      std::uint64_t seed) {
  validate_sequence(sigma);
  validate_sequence(sigma_hat);

  const BufferState empty{{}, sigma.capacity};

  OptResult true_opt = opt_dp(sigma);
  OptResult pred_opt = opt_dp(sigma_hat);
  Trace opt_trace = replay_schedule(sigma, empty, true_opt.accepted_ids);
  validate_trace(opt_trace, sigma, empty);

  if (cfg.oracle_checks && sigma.packet_count() <= kBruteForceLimit) {
    Value brute = opt_bruteforce(sigma, empty);
    if (brute != true_opt.value)
      throw std::logic_error("oracle mismatch on " + instance_id + ": dp=" +
                             std::to_string(true_opt.value) + " brute=" +
                             std::to_string(brute));
  }

  ErrorReport err = prediction_error_from(true_opt, pred_opt);

  GreedyPolicy greedy;
  Trace greedy_trace = simulate(greedy, sigma);
  validate_trace(greedy_trace, sigma, empty);

  PgPolicy pg(PGParams{cfg.pg_beta});
  Trace pg_trace = simulate(pg, sigma);
  validate_trace(pg_trace, sigma, empty);

  PredictionArtifacts artifacts = PredictionArtifacts::from_sequence(sigma_hat);
  FollowPredictionPolicy follow(artifacts.accepted_ids);
  Trace follow_trace = simulate(follow, sigma);
  validate_trace(follow_trace, sigma, empty);

  std::vector<RunRecord> records;
  for (FallbackKind fb : cfg.fallbacks) {
    auto guarded =
        make_guarded(sigma.capacity, artifacts, cfg.rho, fb, PGParams{cfg.pg_beta});
    Trace alg_trace = simulate(*guarded, sigma);
    validate_trace(alg_trace, sigma, empty);

    BoundInputs in;
    in.v_opt_true = true_opt.value;
    in.v_opt_pred = pred_opt.value;
    in.v_alg = alg_trace.total_value();
    in.v_pg = pg_trace.total_value();
    in.v_greedy = greedy_trace.total_value();
    in.eta = err.eta;
    in.switch_step = guarded->switch_step();
    in.v_opt_buffer_at_switch =
        guarded->switched() ? opt_trace.buffer_value_after_arrivals(guarded->switch_step() - 1)
                            : 0;
    in.rho = cfg.rho;
    in.fallback = fb;

    RunRecord rec = bound_suite(in);
    rec.instance_id = instance_id;
    rec.seed = seed;
    rec.v_follow = follow_trace.total_value();
    bool baseline_fired = false;
    for (const auto& c : guarded->check_log())
      baseline_fired = baseline_fired || c.fired_baseline_check;
    rec.baseline_check_fired = baseline_fired;
    records.push_back(std::move(rec));
  }
  return records;
}

SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "eta-noise") return SweepAxis::kEtaNoise;
  if (name == "rho") return SweepAxis::kRho;
  if (name == "T") return SweepAxis::kT;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

std::string sweep_csv_header() {
  return run_record_csv_header() + ",agg_max_ratio,agg_mean_ratio,agg_switch_freq";
}

namespace {

std::string format_double_csv(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string grid_label(SweepAxis axis, double v) {
  std::string axis_name;
  switch (axis) {
    case SweepAxis::kEtaNoise: axis_name = "eta-noise"; break;
    case SweepAxis::kRho: axis_name = "rho"; break;
    case SweepAxis::kT: axis_name = "T"; break;
  }
  return axis_name + "=" + format_double_csv(v);
}

}  // namespace

void sweep(const SweepConfig& cfg, std::ostream& out) {
  out << sweep_csv_header() << "\n";
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    const double point = cfg.grid[gi];
    GenConfig gen_cfg = cfg.base;
    NoiseModel noise = cfg.noise;
    ExperimentConfig exp_cfg = cfg.experiment;
    switch (cfg.axis) {
      case SweepAxis::kEtaNoise: noise.prob = point; break;
      case SweepAxis::kRho: exp_cfg.rho = point; break;
      case SweepAxis::kT: gen_cfg.T = static_cast<int>(point); break;
    }

    const int n = cfg.instances_per_point;
    std::vector<std::vector<RunRecord>> results(n);
    parallel_for(n, [&](int i) {
      std::uint64_t instance_seed =
          Rng::substream(cfg.seed, gi * 1000003ULL + static_cast<std::uint64_t>(i)).next();
      GenConfig g = gen_cfg;
      g.seed = instance_seed;
      ArrivalSequence sigma = generate(g);
      NoiseModel m = noise;
      m.seed = instance_seed ^ 0x5DEECE66DULL;
      ArrivalSequence sigma_hat = perturb(sigma, m);
      std::ostringstream id;
      id << grid_label(cfg.axis, point) << ":" << i;
      results[i] = run_experiment(sigma, sigma_hat, exp_cfg, id.str(), instance_seed);
    });

    double max_ratio = 0.0;
    double ratio_sum = 0.0;
    int switches = 0;
    int rows = 0;
    for (const auto& recs : results) {
      for (const auto& rec : recs) {
        out << run_record_csv_row(rec) << ",,,\n";
        max_ratio = std::max(max_ratio, rec.ratio);
        ratio_sum += rec.ratio;
        if (rec.switch_step > 0) ++switches;
        ++rows;
      }
    }
    FallbackKind agg_fb = exp_cfg.fallbacks.empty() ? FallbackKind::kPreemptiveGreedy
                                                    : exp_cfg.fallbacks.front();
    out << "agg:" << grid_label(cfg.axis, point) << "," << cfg.seed << ","
        << format_double_csv(exp_cfg.rho) << "," << fallback_name(agg_fb);
    for (int blank = 0; blank < 15; ++blank) out << ",";  // unused run columns
    out << format_double_csv(max_ratio) << ","
        << format_double_csv(rows > 0 ? ratio_sum / rows : 0.0) << ","
        << format_double_csv(rows > 0 ? static_cast<double>(switches) / rows : 0.0)
        << "\n";
  }
}

// ---------------------------------------------------------------------------
// Verification suites.

namespace {

// Small random instances inside the enumeration guard: T <= 8, capacity <= 3,
// at most 12 packets in total (arrivals plus residents).
struct OracleInstance {
  ArrivalSequence seq;
  BufferState initial;
};

OracleInstance make_oracle_instance(std::uint64_t seed, std::uint64_t index,
                                    bool with_initial) {
  Rng rng = Rng::substream(seed, index);
  OracleInstance inst;
  int T = static_cast<int>(rng.range(0, 8));
  int cap = static_cast<int>(rng.range(1, 3));
  inst.seq.capacity = cap;
  inst.seq.steps.resize(T);
  inst.initial.capacity = cap;

  int budget = 12;
  PacketId next_id = 1;
  if (with_initial) {
    int residents = static_cast<int>(rng.range(0, cap));
    for (int i = 0; i < residents && budget > 0; ++i, --budget)
      inst.initial.queue.push_back({next_id++, rng.range(1, 20)});
  }
  for (int s = 0; s < T; ++s) {
    int k = static_cast<int>(rng.range(0, 3));
    for (int i = 0; i < k && budget > 0; ++i, --budget)
      inst.seq.steps[s].push_back({next_id++, rng.range(1, 20)});
  }
  return inst;
}

}  // namespace

SuiteResult verify_oracle_equivalence(int instances, std::uint64_t seed) {
  SuiteResult res;
  res.name = "oracle-equivalence";
  std::vector<std::string> failures(instances);
  std::atomic<int> failure_count{0};
  parallel_for(instances, [&](int i) {
    OracleInstance inst = make_oracle_instance(seed, i, true);
    OptResult dp = opt_dp(inst.seq, inst.initial);
    Value brute = opt_bruteforce(inst.seq, inst.initial);
    if (dp.value != brute) {
      failures[i] = "instance " + std::to_string(i) + ": dp=" + std::to_string(dp.value) +
                    " brute=" + std::to_string(brute);
      failure_count.fetch_add(1);
    }
  });
  res.checks = instances;
  res.failures = failure_count.load();
  res.passed = res.failures == 0;
  for (const auto& f : failures)
    if (!f.empty() && res.detail.size() < 500) res.detail += f + "; ";
  return res;
}

SuiteResult verify_opt_comparison_bounds(int pairs, std::uint64_t seed) {
  SuiteResult res;
  res.name = "opt-comparison-bounds";
  std::vector<std::string> failures(pairs);
  std::atomic<int> failure_count{0};
  parallel_for(pairs, [&](int i) {
    OracleInstance inst = make_oracle_instance(seed ^ 0xC0FFEEULL, i, true);
    Value with_buffer = opt_dp(inst.seq, inst.initial).value;
    Value from_empty = opt_dp(inst.seq, BufferState{{}, inst.seq.capacity}).value;
    Value eps = inst.initial.total_value();
    if (!(from_empty - eps <= with_buffer && with_buffer <= from_empty + eps)) {
      failures[i] = "pair " + std::to_string(i) + ": empty=" + std::to_string(from_empty) +
                    " buffered=" + std::to_string(with_buffer) + " eps=" + std::to_string(eps);
      failure_count.fetch_add(1);
    }
  });
  res.checks = pairs;
  res.failures = failure_count.load();
  res.passed = res.failures == 0;
  for (const auto& f : failures)
    if (!f.empty() && res.detail.size() < 500) res.detail += f + "; ";
  return res;
}

SuiteResult verify_arrivals_only_dominance(int pairs, std::uint64_t seed) {
  SuiteResult res;
  res.name = "arrivals-only-dominance";
  std::vector<std::string> failures(pairs);
  std::atomic<int> failure_count{0};
  parallel_for(pairs, [&](int i) {
    OracleInstance inst = make_oracle_instance(seed ^ 0xBEEFULL, i, true);
    Value from_empty =
        opt_from_arrivals_only(inst.seq, BufferState{{}, inst.seq.capacity});
    Value from_buffer = opt_from_arrivals_only(inst.seq, inst.initial);
    if (!(from_empty >= from_buffer)) {
      failures[i] = "pair " + std::to_string(i) + ": empty=" + std::to_string(from_empty) +
                    " buffered=" + std::to_string(from_buffer);
      failure_count.fetch_add(1);
    }
  });
  res.checks = pairs;
  res.failures = failure_count.load();
  res.passed = res.failures == 0;
  for (const auto& f : failures)
    if (!f.empty() && res.detail.size() < 500) res.detail += f + "; ";
  return res;
}

namespace {

// Exercises arbitrary legal decisions, including preemptions without accepts.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}

  PolicyDecision on_arrival(const Packet&, const BufferState& buffer, int) override {
    PolicyDecision d;
    for (const Packet& q : buffer.queue)
      if (rng_.chance(0.2)) d.preemptions.push_back(q.id);
    int occ_after = buffer.occupancy() - static_cast<int>(d.preemptions.size());
    if (occ_after < buffer.capacity && rng_.chance(0.7))
      d.action = PolicyDecision::Action::kAccept;
    return d;
  }

 private:
  Rng rng_;
};

}  // namespace

SuiteResult verify_engine_invariants(int instances, std::uint64_t seed) {
  SuiteResult res;
  res.name = "engine-invariants";
  std::vector<std::string> failures(instances);
  std::atomic<int> failure_count{0};
  parallel_for(instances, [&](int i) {
    try {
      Rng rng = Rng::substream(seed ^ 0xFEEDULL, i);
      GenConfig cfg;
      cfg.T = static_cast<int>(rng.range(0, 12));
      cfg.capacity = static_cast<int>(rng.range(1, 4));
      cfg.arrivals_kind = GenConfig::ArrivalsKind::kUniformRange;
      cfg.arrivals_min = 0;
      cfg.arrivals_max = 3;
      cfg.seed = rng.next();
      ArrivalSequence seq = generate(cfg);
      const BufferState empty{{}, seq.capacity};

      RandomPolicy random_policy(rng.next());
      Trace t1 = simulate(random_policy, seq, empty);
      validate_trace(t1, seq, empty);

      GreedyPolicy greedy;
      Trace t2 = simulate(greedy, seq, empty);
      validate_trace(t2, seq, empty);

      PgPolicy pg;
      Trace t3 = simulate(pg, seq, empty);
      validate_trace(t3, seq, empty);

      // Replays of the same policy state must be bit-identical.
      std::uint64_t rp_seed = rng.next();
      RandomPolicy a(rp_seed), b(rp_seed);
      Trace ta = simulate(a, seq, empty);
      Trace tb = simulate(b, seq, empty);
      if (trace_to_jsonl(ta) != trace_to_jsonl(tb))
        throw ValidationError("replay of an identical policy diverged");
    } catch (const std::exception& e) {
      failures[i] = "instance " + std::to_string(i) + ": " + e.what();
      failure_count.fetch_add(1);
    }
  });
  res.checks = instances;
  res.failures = failure_count.load();
  res.passed = res.failures == 0;
  for (const auto& f : failures)
    if (!f.empty() && res.detail.size() < 500) res.detail += f + "; ";
  return res;
}

VerifyScale verify_scale(const std::string& name) {
  if (name == "small") return VerifyScale{100, 200, 100};
  if (name == "full") return VerifyScale{500, 1000, 400};
  throw std::invalid_argument("unknown verify scale: " + name);
}

std::vector<SuiteResult> run_verification(const VerifyScale& scale, std::uint64_t seed) {
  std::vector<SuiteResult> suites;
  suites.push_back(verify_oracle_equivalence(scale.oracle_instances, seed));
  suites.push_back(verify_opt_comparison_bounds(scale.comparison_pairs, seed));
  suites.push_back(verify_arrivals_only_dominance(scale.comparison_pairs, seed));
  suites.push_back(verify_engine_invariants(scale.invariant_instances, seed));
  return suites;
}

// ---------------------------------------------------------------------------
// Config / file plumbing.

namespace {

GenConfig gen_config_from(const nlohmann::json& j) {
  GenConfig cfg;
  cfg.T = j.value("T", cfg.T);
  cfg.capacity = j.value("capacity", cfg.capacity);
  if (j.contains("arrivals")) {
    const auto& a = j.at("arrivals");
    if (a.contains("fixed")) {
      cfg.arrivals_kind = GenConfig::ArrivalsKind::kFixed;
      cfg.arrivals_fixed = a.at("fixed").get<int>();
    } else if (a.contains("min") || a.contains("max")) {
      cfg.arrivals_kind = GenConfig::ArrivalsKind::kUniformRange;
      cfg.arrivals_min = a.value("min", 0);
      cfg.arrivals_max = a.value("max", cfg.arrivals_min);
    }
  }
  if (j.contains("values")) {
    const auto& v = j.at("values");
    if (v.contains("uniform")) {
      cfg.value_kind = GenConfig::ValueKind::kUniform;
      cfg.value_lo = v.at("uniform").at(0).get<Value>();
      cfg.value_hi = v.at("uniform").at(1).get<Value>();
    } else if (v.contains("two_point")) {
      cfg.value_kind = GenConfig::ValueKind::kTwoPoint;
      cfg.big_value = v.at("two_point").value("big", cfg.big_value);
      cfg.big_prob = v.at("two_point").value("prob", cfg.big_prob);
    }
  }
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

NoiseModel noise_model_from(const nlohmann::json& j) {
  NoiseModel m;
  std::string kind = j.value("kind", "none");
  if (kind == "none") m.kind = NoiseModel::Kind::kNone;
  else if (kind == "value-noise") m.kind = NoiseModel::Kind::kValueNoise;
  else if (kind == "drop") m.kind = NoiseModel::Kind::kDrop;
  else if (kind == "insert") m.kind = NoiseModel::Kind::kInsert;
  else if (kind == "shift") m.kind = NoiseModel::Kind::kShift;
  else if (kind == "adversarial-empty") m.kind = NoiseModel::Kind::kAdversarialEmpty;
  else if (kind == "adversarial-inflate") m.kind = NoiseModel::Kind::kAdversarialInflate;
  else throw std::invalid_argument("unknown noise kind: " + kind);
  m.prob = j.value("p", m.prob);
  m.magnitude = j.value("magnitude", m.magnitude);
  m.insert_value_lo = j.value("insert_value_lo", m.insert_value_lo);
  m.insert_value_hi = j.value("insert_value_hi", m.insert_value_hi);
  m.max_shift = j.value("max_shift", m.max_shift);
  m.inflate_factor = j.value("factor", m.inflate_factor);
  m.seed = j.value("seed", m.seed);
  if (m.prob < 0.0 || m.prob > 1.0)
    throw std::invalid_argument("noise probability outside [0, 1]");
  return m;
}

}  // namespace

GenConfig gen_config_from_json(const std::string& text) {
  return gen_config_from(nlohmann::json::parse(text));
}

NoiseModel noise_model_from_json(const std::string& text) {
  return noise_model_from(nlohmann::json::parse(text));
}

ArrivalSequence load_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sequence_from_json(buffer.str());
}

void save_sequence(const std::string& path, const ArrivalSequence& seq) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << sequence_to_json(seq);
}

int worker_count() {
  const char* env = std::getenv("FIFOLAP_THREADS");
  long n = 0;
  if (env != nullptr) n = std::strtol(env, nullptr, 10);
  if (n <= 0) n = static_cast<long>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  return static_cast<int>(n);
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fifolap
