#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include "fifolap/lab.hpp"
#include "fifolap/offline.hpp"

using namespace fifolap;

namespace {

std::set<PacketId> all_ids(const ArrivalSequence& seq) {
  std::set<PacketId> ids;
  for (const auto& step : seq.steps)
    for (const auto& p : step) ids.insert(p.id);
  return ids;
}

}  // namespace

TEST_CASE("generate is a pure function of its config") {
  GenConfig cfg;
  cfg.T = 6;
  cfg.capacity = 2;
  cfg.arrivals_kind = GenConfig::ArrivalsKind::kUniformRange;
  cfg.arrivals_min = 0;
  cfg.arrivals_max = 3;
  cfg.seed = 12345;
  CHECK(sequence_to_json(generate(cfg)) == sequence_to_json(generate(cfg)));

  GenConfig other = cfg;
  other.seed = 12346;
  CHECK(sequence_to_json(generate(cfg)) != sequence_to_json(generate(other)));

  cfg.T = 0;
  CHECK(generate(cfg).step_count() == 0);
}

TEST_CASE("generate golden snapshot") {
  GenConfig cfg;
  cfg.T = 4;
  cfg.capacity = 2;
  cfg.arrivals_kind = GenConfig::ArrivalsKind::kFixed;
  cfg.arrivals_fixed = 2;
  cfg.value_kind = GenConfig::ValueKind::kUniform;
  cfg.value_lo = 1;
  cfg.value_hi = 10;
  cfg.seed = 7;
  ArrivalSequence seq = generate(cfg);
  REQUIRE(seq.step_count() == 4);
  std::vector<Value> values;
  for (const auto& step : seq.steps)
    for (const auto& p : step) values.push_back(p.value);
  // Frozen from the first run; guards the generator against drift.
  CHECK(values == std::vector<Value>{1, 10, 6, 5, 3, 5, 4, 2});
  CHECK(all_ids(seq) == std::set<PacketId>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("perturb kinds behave as documented") {
  GenConfig cfg;
  cfg.T = 8;
  cfg.capacity = 2;
  cfg.seed = 9;
  ArrivalSequence sigma = generate(cfg);

  SUBCASE("none is byte-identical") {
    NoiseModel m;
    CHECK(sequence_to_json(perturb(sigma, m)) == sequence_to_json(sigma));
  }

  SUBCASE("adversarial-empty keeps T and capacity") {
    NoiseModel m;
    m.kind = NoiseModel::Kind::kAdversarialEmpty;
    ArrivalSequence hat = perturb(sigma, m);
    CHECK(hat.step_count() == sigma.step_count());
    CHECK(hat.capacity == sigma.capacity);
    CHECK(hat.packet_count() == 0);
  }

  SUBCASE("drop with probability one empties the prediction") {
    NoiseModel m;
    m.kind = NoiseModel::Kind::kDrop;
    m.prob = 1.0;
    CHECK(perturb(sigma, m).packet_count() == 0);
  }

  SUBCASE("value noise keeps ids and positions") {
    NoiseModel m;
    m.kind = NoiseModel::Kind::kValueNoise;
    m.prob = 1.0;
    m.magnitude = 3.0;
    m.seed = 4;
    ArrivalSequence hat = perturb(sigma, m);
    REQUIRE(hat.step_count() == sigma.step_count());
    for (int s = 0; s < sigma.step_count(); ++s) {
      REQUIRE(hat.steps[s].size() == sigma.steps[s].size());
      for (std::size_t i = 0; i < hat.steps[s].size(); ++i) {
        CHECK(hat.steps[s][i].id == sigma.steps[s][i].id);
        CHECK(hat.steps[s][i].value >= 1);
      }
    }
  }

  SUBCASE("insert adds fresh ids only") {
    NoiseModel m;
    m.kind = NoiseModel::Kind::kInsert;
    m.prob = 1.0;
    m.seed = 5;
    ArrivalSequence hat = perturb(sigma, m);
    CHECK(hat.packet_count() == sigma.packet_count() + sigma.step_count());
    auto base = all_ids(sigma);
    for (PacketId id : all_ids(sigma)) CHECK(all_ids(hat).count(id) == 1);
    CHECK(all_ids(hat).size() == base.size() + sigma.step_count());
  }

  SUBCASE("shift keeps every packet within the horizon") {
    NoiseModel m;
    m.kind = NoiseModel::Kind::kShift;
    m.prob = 1.0;
    m.max_shift = 3;
    m.seed = 6;
    ArrivalSequence hat = perturb(sigma, m);
    CHECK(hat.step_count() == sigma.step_count());
    CHECK(all_ids(hat) == all_ids(sigma));
  }

  SUBCASE("inflate multiplies every value") {
    NoiseModel m;
    m.kind = NoiseModel::Kind::kAdversarialInflate;
    m.inflate_factor = 5;
    ArrivalSequence hat = perturb(sigma, m);
    for (int s = 0; s < sigma.step_count(); ++s)
      for (std::size_t i = 0; i < hat.steps[s].size(); ++i)
        CHECK(hat.steps[s][i].value == sigma.steps[s][i].value * 5);
  }
}

TEST_CASE("run_experiment on a perfect prediction reports ratio one") {
  GenConfig cfg;
  cfg.T = 8;
  cfg.capacity = 2;
  cfg.seed = 21;
  ArrivalSequence sigma = generate(cfg);
  ExperimentConfig exp;
  exp.fallbacks = {FallbackKind::kPreemptiveGreedy, FallbackKind::kGreedy};
  auto records = run_experiment(sigma, sigma, exp, "perfect", 21);
  REQUIRE(records.size() == 2);
  for (const auto& r : records) {
    CHECK(r.ratio == doctest::Approx(1.0));
    CHECK(r.eta == 0);
    CHECK(r.switch_step == 0);
    CHECK(r.flag_a);
    CHECK(r.flag_b);
    CHECK(r.flag_c);
    CHECK(r.flag_d);
    CHECK(r.v_alg == r.v_opt_true);
    CHECK(r.v_follow == r.v_opt_true);
  }
}

TEST_CASE("run_experiment on the empty instance is vacuous") {
  ArrivalSequence sigma;
  sigma.capacity = 1;
  auto records = run_experiment(sigma, sigma, ExperimentConfig{}, "empty", 0);
  REQUIRE(records.size() == 1);
  CHECK(records[0].v_opt_true == 0);
  CHECK(records[0].v_alg == 0);
  CHECK(records[0].ratio == doctest::Approx(1.0));
  CHECK(records[0].flag_b);
  CHECK(records[0].flag_d);
}

TEST_CASE("run_experiment honors the oracle cross-check") {
  GenConfig cfg;
  cfg.T = 5;
  cfg.capacity = 2;
  cfg.arrivals_kind = GenConfig::ArrivalsKind::kFixed;
  cfg.arrivals_fixed = 2;
  cfg.seed = 3;
  ArrivalSequence sigma = generate(cfg);  // 10 packets, inside the guard
  ExperimentConfig exp;
  exp.oracle_checks = true;
  CHECK_NOTHROW(run_experiment(sigma, sigma, exp, "oracle", 3));
}

TEST_CASE("sweep emits run rows plus one aggregate row per grid point") {
  SweepConfig cfg;
  cfg.axis = SweepAxis::kEtaNoise;
  cfg.grid = {0.0, 0.5};
  cfg.base.T = 6;
  cfg.base.capacity = 2;
  cfg.noise.kind = NoiseModel::Kind::kDrop;
  cfg.instances_per_point = 4;
  cfg.seed = 77;

  std::ostringstream out;
  sweep(cfg, out);
  std::istringstream in(out.str());
  std::string line;
  const std::string header = sweep_csv_header();
  const auto header_commas = std::count(header.begin(), header.end(), ',');
  int rows = 0, aggs = 0;
  std::getline(in, line);
  CHECK(line == header);
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("agg:", 0) == 0) ++aggs;
    CHECK(std::count(line.begin(), line.end(), ',') == header_commas);
  }
  CHECK(aggs == 2);
  CHECK(rows == 2 * 4 + 2);

  // Byte-identical on a rerun.
  std::ostringstream again;
  sweep(cfg, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("an empty grid produces only the header") {
  SweepConfig cfg;
  cfg.grid = {};
  std::ostringstream out;
  sweep(cfg, out);
  CHECK(out.str() == sweep_csv_header() + "\n");
}

TEST_CASE("rho and T axes drive the swept parameter") {
  SweepConfig cfg;
  cfg.axis = SweepAxis::kRho;
  cfg.grid = {1.0, 1.2, kSqrt3};
  cfg.base.T = 5;
  cfg.base.capacity = 2;
  cfg.noise.kind = NoiseModel::Kind::kDrop;
  cfg.noise.prob = 0.3;
  cfg.instances_per_point = 3;
  cfg.seed = 11;

  std::ostringstream out;
  sweep(cfg, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);  // header
  int aggs = 0;
  while (std::getline(in, line)) {
    if (line.rfind("agg:rho=", 0) == 0) ++aggs;
  }
  CHECK(aggs == 3);
  CHECK(out.str().find("agg:rho=1.2,") != std::string::npos);

  SweepConfig tcfg;
  tcfg.axis = SweepAxis::kT;
  tcfg.grid = {3, 9};
  tcfg.base.capacity = 2;
  tcfg.instances_per_point = 2;
  tcfg.seed = 12;
  std::ostringstream tout;
  sweep(tcfg, tout);
  CHECK(tout.str().find("agg:T=3,") != std::string::npos);
  CHECK(tout.str().find("agg:T=9,") != std::string::npos);

  CHECK(sweep_axis_from_name("rho") == SweepAxis::kRho);
  CHECK(sweep_axis_from_name("T") == SweepAxis::kT);
  CHECK(sweep_axis_from_name("eta-noise") == SweepAxis::kEtaNoise);
  CHECK_THROWS_AS(sweep_axis_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("gen/noise configs parse from JSON") {
  GenConfig g = gen_config_from_json(
      R"({"T": 12, "capacity": 3, "arrivals": {"min": 1, "max": 4},
          "values": {"two_point": {"big": 500, "prob": 0.2}}, "seed": 5})");
  CHECK(g.T == 12);
  CHECK(g.capacity == 3);
  CHECK(g.arrivals_kind == GenConfig::ArrivalsKind::kUniformRange);
  CHECK(g.arrivals_max == 4);
  CHECK(g.value_kind == GenConfig::ValueKind::kTwoPoint);
  CHECK(g.big_value == 500);
  CHECK(g.seed == 5);

  NoiseModel m = noise_model_from_json(R"({"kind": "value-noise", "p": 0.3, "magnitude": 4})");
  CHECK(m.kind == NoiseModel::Kind::kValueNoise);
  CHECK(m.prob == doctest::Approx(0.3));
  CHECK(m.magnitude == doctest::Approx(4.0));

  CHECK_THROWS_AS(noise_model_from_json(R"({"kind": "bogus"})"), std::invalid_argument);
  CHECK_THROWS_AS(noise_model_from_json(R"({"kind": "drop", "p": 1.5})"),
                  std::invalid_argument);
}

TEST_CASE("sweep output does not depend on the worker count") {
  SweepConfig cfg;
  cfg.axis = SweepAxis::kEtaNoise;
  cfg.grid = {0.2, 0.6};
  cfg.base.T = 8;
  cfg.base.capacity = 2;
  cfg.noise.kind = NoiseModel::Kind::kDrop;
  cfg.instances_per_point = 10;
  cfg.seed = 31;

  const char* prev = std::getenv("FIFOLAP_THREADS");
  std::string saved = prev ? prev : "";

  setenv("FIFOLAP_THREADS", "1", 1);
  std::ostringstream serial;
  sweep(cfg, serial);
  CHECK(worker_count() == 1);

  setenv("FIFOLAP_THREADS", "4", 1);
  std::ostringstream parallel;
  sweep(cfg, parallel);
  CHECK(worker_count() == 4);

  if (prev)
    setenv("FIFOLAP_THREADS", saved.c_str(), 1);
  else
    unsetenv("FIFOLAP_THREADS");

  CHECK(serial.str() == parallel.str());
}

TEST_CASE("a prediction with a different horizon still runs") {
  GenConfig cfg;
  cfg.T = 6;
  cfg.capacity = 2;
  cfg.seed = 41;
  ArrivalSequence sigma = generate(cfg);

  // Trailing empty predicted steps extend the drain horizon, so the
  // predicted optimum may accept packets the true horizon cannot deliver.
  ArrivalSequence longer = sigma;
  longer.steps.resize(10);
  auto records = run_experiment(sigma, longer, ExperimentConfig{}, "longer", 41);
  CHECK(records.front().v_alg <= records.front().v_opt_true);
  CHECK(records.front().ratio >= 1.0);

  ArrivalSequence shorter = sigma;
  shorter.steps.resize(3);
  for (auto& step : shorter.steps) step.clear();
  CHECK_NOTHROW(run_experiment(sigma, shorter, ExperimentConfig{}, "shorter", 41));
}

TEST_CASE("sequences round-trip through files") {
  namespace fs = std::filesystem;
  GenConfig cfg;
  cfg.T = 5;
  cfg.seed = 2;
  ArrivalSequence seq = generate(cfg);
  fs::path dir = fs::temp_directory_path() / "fifolap_test_io";
  fs::create_directories(dir);
  std::string path = (dir / "inst.json").string();
  save_sequence(path, seq);
  ArrivalSequence back = load_sequence(path);
  CHECK(sequence_to_json(back) == sequence_to_json(seq));
  fs::remove_all(dir);
}

TEST_CASE("verification suites pass at the small scale") {
  VerifyScale scale = verify_scale("small");
  auto suites = run_verification(scale, 2024);
  for (const auto& s : suites) {
    CAPTURE(s.name);
    CAPTURE(s.detail);
    CHECK(s.passed);
  }
  CHECK_THROWS_AS(verify_scale("bogus"), std::invalid_argument);
}
