// Command-line front end: run one experiment, sweep a list of variants, or
// solve the ground-truth saddle point for a config.
//
// Exit codes: 0 success, 2 bad config, 3 divergence, 4 oracle unconverged.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "scaffpd/errors.hpp"
#include "scaffpd/experiment.hpp"
#include "scaffpd/oracle.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitOracle = 4;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw scaffpd::ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

int cmd_run(const std::string& config_path) {
  const auto config = scaffpd::load_experiment_config(config_path);
  const auto summary = scaffpd::run_experiment(config);
  std::cout << summary.to_json();
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& output) {
  const auto summaries = scaffpd::run_sweep(read_file(config_path), output);
  std::cout << "completed " << summaries.size() << " runs, table at "
            << output << "\n";
  return 0;
}

int cmd_oracle(const std::string& config_path, double tol, long max_iters) {
  const auto config = scaffpd::load_experiment_config(config_path);
  scaffpd::Federation fed = scaffpd::generate_synthetic(config.synth);
  const auto geom = scaffpd::build_geometry(config.dual, fed.size());
  const auto saddle = scaffpd::solve_saddle_oracle(fed, geom, tol, max_iters);
  nlohmann::json doc;
  doc["x_star"] = std::vector<double>(
      saddle.x_star.data(), saddle.x_star.data() + saddle.x_star.size());
  doc["lambda_star"] = std::vector<double>(
      saddle.lambda_star.data(),
      saddle.lambda_star.data() + saddle.lambda_star.size());
  doc["kkt_residual"] = saddle.kkt_residual;
  doc["converged"] = saddle.converged;
  doc["iterations"] = saddle.iterations;
  std::cout << doc.dump(2) << "\n";
  if (!saddle.converged) {
    std::cerr << "oracle did not reach tolerance " << tol << "\n";
    return kExitOracle;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated robust-optimization experiment harness"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "run one experiment from a config");
  run->add_option("--config", run_config, "JSON config path")->required();

  std::string sweep_config;
  std::string sweep_output = "sweep.csv";
  auto* sweep =
      app.add_subcommand("sweep", "run a base config with variant overrides");
  sweep->add_option("--config", sweep_config, "JSON sweep document path")
      ->required();
  sweep->add_option("--output", sweep_output, "combined results table path");

  std::string oracle_config;
  double oracle_tol = 1e-12;
  long oracle_max_iters = 1000000;
  auto* oracle =
      app.add_subcommand("oracle", "solve the ground-truth saddle point");
  oracle->add_option("--config", oracle_config, "JSON config path")
      ->required();
  oracle->add_option("--tol", oracle_tol, "target residual");
  oracle->add_option("--max-iters", oracle_max_iters, "iteration budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_config);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_output);
    if (oracle->parsed())
      return cmd_oracle(oracle_config, oracle_tol, oracle_max_iters);
  } catch (const scaffpd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const scaffpd::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const scaffpd::OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return kExitOracle;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
