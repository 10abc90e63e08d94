#pragma once

#include <Eigen/Dense>

#include "scaffpd/solver.hpp"

namespace scaffpd {

enum class BaselineKind { kFedAvg, kScaffold, kPdFedAvg };

struct BaselineConfig {
  BaselineKind kind = BaselineKind::kFedAvg;
  double eta_local = 0.0;
  int steps = 1;
  double eta_global = 1.0;
  double dual_step = 0.0;  // pd_fedavg only
};

// Plain local SGD, uniform server averaging, no drift correction.
Trace run_fedavg(const Federation& fed, const BaselineConfig& config,
                 const Eigen::VectorXd& x0, int rounds,
                 const RunOptions& options = {});

// Corrected local steps (g_i - c_i + c with uniform c), uniform averaging;
// solves the average objective.
Trace run_scaffold(const Federation& fed, const BaselineConfig& config,
                   const Eigen::VectorXd& x0, int rounds,
                   const RunOptions& options = {});

// Prox-GDA: dual prox on the raw loss vector (no extrapolation), plain local
// SGD (no control variates), lambda-weighted aggregation.
Trace run_pd_fedavg(const Federation& fed, const DualGeometry& geom,
                    const BaselineConfig& config, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& lambda0, int rounds,
                    const RunOptions& options = {});

// pd_fedavg with the two removed mechanisms toggled back on. With both flags
// set this reproduces run_scaffpd under the matching manual schedule exactly
// (same primitives, same call order); used as an equivalence check.
Trace run_pd_fedavg_flags(const Federation& fed, const DualGeometry& geom,
                          const BaselineConfig& config,
                          const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& lambda0, int rounds,
                          bool extrapolate, bool control_variates,
                          double theta, const RunOptions& options = {});

}  // namespace scaffpd
