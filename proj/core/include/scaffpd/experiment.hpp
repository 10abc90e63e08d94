#pragma once

#include <string>
#include <vector>

#include "scaffpd/baselines.hpp"
#include "scaffpd/dual_geometry.hpp"
#include "scaffpd/federation.hpp"
#include "scaffpd/oracle.hpp"
#include "scaffpd/schedule.hpp"
#include "scaffpd/solver.hpp"

namespace scaffpd {

enum class AlgorithmKind { kScaffpd, kFedAvg, kScaffold, kPdFedAvg };

struct GeometryConfig {
  GeometryKind kind = GeometryKind::kChi2;
  double rho = 0.0;
  double alpha = 1.0;
  double q = 1.0;
};

struct ScheduleConfig {
  ScheduleMode mode = ScheduleMode::kScsc;
  // scc knobs
  double gamma0 = 1.0;
  double delta = 0.25;
  double c_alpha = 0.25;
  // scsc knobs
  double epsilon = 1e-8;
  double c_omega = 1.0;
  double c_zeta = 4.0;
  // manual values
  double tau = 0.0;
  double sigma = 0.0;
  double theta = 0.0;
};

struct ExperimentConfig {
  SynthConfig synth;
  GeometryConfig dual;
  AlgorithmKind algorithm = AlgorithmKind::kScaffpd;
  ScheduleConfig schedule;
  NoiseModel noise;
  int local_steps = 1;
  double eta_global = 1.0;
  double eta_local = 0.0;   // baselines only; scaffpd derives it from tau
  double dual_step = 0.0;   // pd_fedavg
  int rounds = 100;
  int metrics_stride = 1;
  bool parallel_clients = false;
  double oracle_tol = 1e-12;
  std::string output_path = "trace.csv";
  std::string summary_path;  // defaults to output_path with .json
  std::string label;
};

// Parses and cross-validates a single JSON config document.
// Throws ConfigError with a human-readable message on any problem.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct RunSummary {
  double final_dist_sq = 0.0;
  double initial_dist_sq = 0.0;
  double log_slope = 0.0;       // OLS on the second half of the trace
  long rounds_to_tol = -1;      // first round with dist_sq <= 1e-6, -1 if never
  double wall_time_s = 0.0;
  double oracle_residual = 0.0;
  std::string label;
  std::string to_json() const;
};

// Builds the federation, solves the ground-truth saddle, dispatches the
// configured algorithm, writes the CSV trace and JSON summary.
RunSummary run_experiment(const ExperimentConfig& config);

// Builds the schedule for a config given estimated constants.
ScheduleState build_schedule(const ExperimentConfig& config,
                             const ProblemConstants& constants);
DualGeometry build_geometry(const GeometryConfig& config, int n);

// Sweep document: {"base": <config>, "variants": [<partial overrides>]}.
// Runs every variant, writes each trace, and appends one row per run
// (keyed by a hash of the variant's JSON) to a combined CSV at output_path.
// Per-run failures are recorded in the table; the first error is rethrown
// after all runs complete.
std::vector<RunSummary> run_sweep(const std::string& json_text,
                                  const std::string& output_path);

}  // namespace scaffpd
