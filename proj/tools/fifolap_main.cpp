// Command-line front end: instance generation, single runs, parameter sweeps
// and the self-verification suites.
//
//   fifolap gen    --config cfg.json --out dir/
//   fifolap run    --sigma inst.json --sigma-hat pred.json --rho 1.73
//                  --fallback pg --out run.csv
//   fifolap sweep  --axis eta-noise --grid 0.1,0.3,0.5 --config cfg.json --out sweep.csv
//   fifolap verify --scale small

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fifolap/lab.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) grid.push_back(std::stod(item));
  }
  return grid;
}

struct BatchConfig {
  int instances = 20;
  std::uint64_t seed = 0;
  fifolap::GenConfig gen;
  fifolap::NoiseModel noise;
};

BatchConfig batch_config_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  BatchConfig cfg;
  cfg.instances = j.value("instances", cfg.instances);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("gen")) cfg.gen = fifolap::gen_config_from_json(j.at("gen").dump());
  if (j.contains("noise"))
    cfg.noise = fifolap::noise_model_from_json(j.at("noise").dump());
  return cfg;
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
  BatchConfig cfg = batch_config_from_json(read_file(config_path));
  fs::create_directories(out_dir);
  for (int i = 0; i < cfg.instances; ++i) {
    std::uint64_t instance_seed = fifolap::Rng::substream(cfg.seed, i).next();
    fifolap::GenConfig g = cfg.gen;
    g.seed = instance_seed;
    fifolap::ArrivalSequence sigma = fifolap::generate(g);
    fifolap::NoiseModel m = cfg.noise;
    m.seed = instance_seed ^ 0x5DEECE66DULL;
    fifolap::ArrivalSequence sigma_hat = fifolap::perturb(sigma, m);

    char name[64];
    std::snprintf(name, sizeof(name), "instance_%04d.json", i);
    fifolap::save_sequence((fs::path(out_dir) / name).string(), sigma);
    std::snprintf(name, sizeof(name), "prediction_%04d.json", i);
    fifolap::save_sequence((fs::path(out_dir) / name).string(), sigma_hat);
  }
  std::cout << "wrote " << cfg.instances << " instance/prediction pairs to " << out_dir
            << "\n";
  return 0;
}

int cmd_run(const std::string& sigma_path, const std::string& sigma_hat_path, double rho,
            double beta, const std::string& fallback, const std::string& out_path,
            std::uint64_t seed, bool eta_sensitivity) {
  fifolap::ArrivalSequence sigma = fifolap::load_sequence(sigma_path);
  fifolap::ArrivalSequence sigma_hat = fifolap::load_sequence(sigma_hat_path);

  fifolap::ExperimentConfig cfg;
  cfg.rho = rho;
  cfg.pg_beta = beta;
  if (fallback == "pg")
    cfg.fallbacks = {fifolap::FallbackKind::kPreemptiveGreedy};
  else if (fallback == "greedy")
    cfg.fallbacks = {fifolap::FallbackKind::kGreedy};
  else
    throw std::invalid_argument("fallback must be pg or greedy");

  auto records =
      fifolap::run_experiment(sigma, sigma_hat, cfg, fs::path(sigma_path).stem().string(),
                              seed);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << fifolap::run_record_csv_header() << "\n";
  for (const auto& rec : records) out << fifolap::run_record_csv_row(rec) << "\n";
  if (eta_sensitivity) {
    auto s = fifolap::prediction_error_sensitivity(sigma, sigma_hat);
    std::cout << "eta sensitivity: canonical=" << s.eta_canonical
              << " alternate=" << s.eta_alternate << " spread=" << s.spread() << "\n";
  }
  std::cout << "wrote " << records.size() << " record(s) to " << out_path << "\n";
  return 0;
}

int cmd_sweep(const std::string& axis, const std::string& grid_text,
              const std::string& config_path, const std::string& out_path) {
  BatchConfig batch = batch_config_from_json(read_file(config_path));
  fifolap::SweepConfig cfg;
  cfg.axis = fifolap::sweep_axis_from_name(axis);
  cfg.grid = parse_grid(grid_text);
  cfg.base = batch.gen;
  cfg.noise = batch.noise;
  cfg.instances_per_point = batch.instances;
  cfg.seed = batch.seed;

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  fifolap::sweep(cfg, out);
  std::cout << "wrote sweep over " << cfg.grid.size() << " grid point(s) to " << out_path
            << "\n";
  return 0;
}

int cmd_verify(const std::string& scale_name, std::uint64_t seed) {
  fifolap::VerifyScale scale = fifolap::verify_scale(scale_name);
  auto suites = fifolap::run_verification(scale, seed);
  bool all_passed = true;
  for (const auto& suite : suites) {
    std::cout << (suite.passed ? "[PASS] " : "[FAIL] ") << suite.name << " ("
              << suite.checks << " checks, " << suite.failures << " failures)";
    if (!suite.detail.empty()) std::cout << " " << suite.detail;
    std::cout << "\n";
    all_passed = all_passed && suite.passed;
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulation lab for preemptive FIFO buffer management "
               "with predictions"};
  app.require_subcommand(1);

  std::string config_path, out_path, sigma_path, sigma_hat_path;
  std::string fallback = "pg";
  std::string axis = "eta-noise";
  std::string grid_text;
  std::string scale_name = "small";
  double rho = fifolap::kSqrt3;
  double beta = fifolap::kDefaultPgBeta;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen", "Generate instance/prediction JSON files");
  gen->add_option("--config", config_path, "Batch config JSON")->required();
  gen->add_option("--out", out_path, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run one instance/prediction pair");
  run->add_option("--sigma", sigma_path, "True sequence JSON")->required();
  run->add_option("--sigma-hat", sigma_hat_path, "Predicted sequence JSON")->required();
  run->add_option("--rho", rho, "Switch threshold (default sqrt(3))");
  run->add_option("--beta", beta, "Preemption threshold for pg (default 2 + sqrt(3))");
  run->add_option("--fallback", fallback, "Fallback policy: pg | greedy");
  run->add_option("--out", out_path, "Output CSV")->required();
  run->add_option("--seed", seed, "Seed recorded in the CSV");
  bool eta_sensitivity = false;
  run->add_flag("--eta-sensitivity", eta_sensitivity,
                "Also print eta under the alternate optimal tie-break");

  auto* sweep = app.add_subcommand("sweep", "Sweep a parameter grid");
  sweep->add_option("--axis", axis, "eta-noise | rho | T")->required();
  sweep->add_option("--grid", grid_text, "Comma-separated grid values")->required();
  sweep->add_option("--config", config_path, "Batch config JSON")->required();
  sweep->add_option("--out", out_path, "Output CSV")->required();

  auto* verify = app.add_subcommand("verify", "Run the self-verification suites");
  verify->add_option("--scale", scale_name, "small | full");
  verify->add_option("--seed", seed, "Master seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_path);
    if (run->parsed())
      return cmd_run(sigma_path, sigma_hat_path, rho, beta, fallback, out_path, seed,
                     eta_sensitivity);
    if (sweep->parsed()) return cmd_sweep(axis, grid_text, config_path, out_path);
    if (verify->parsed()) return cmd_verify(scale_name, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
