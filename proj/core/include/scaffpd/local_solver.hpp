#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "scaffpd/federation.hpp"

namespace scaffpd {

struct LocalUpdateParams {
  double eta_local = 0.0;  // per-step size, normally derived from tau
  int steps = 1;           // local steps per round (J)
  double eta_global = 1.0;

  double tau() const { return steps * eta_local * eta_global; }
};

struct ClientReport {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Collects (f_i(x), g_i(x)). The loss is always exact; the gradient uses
// the federation's noise model with rng call index 0 of the round.
ClientReport client_report(const Federation& fed, int client_id,
                           const Eigen::VectorXd& x, std::uint64_t round);

// Corrected local descent: u_j = u_{j-1} - eta_local*(g_i(u_{j-1}) - c_i + c)
// for J steps from u_0 = x, returning (x - u_J) / (eta_local * J).
// Local step j uses rng call index j (report uses 0, so draws never overlap).
Eigen::VectorXd local_update(const Federation& fed, int client_id,
                             const Eigen::VectorXd& x,
                             const Eigen::VectorXd& c_i,
                             const Eigen::VectorXd& c,
                             const LocalUpdateParams& params,
                             std::uint64_t round);

// Same recursion with exact gradients. The step map is affine for quadratic
// losses, so this equals the expectation of the stochastic path.
Eigen::VectorXd expected_local_path(const Federation& fed, int client_id,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& c_i,
                                    const Eigen::VectorXd& c,
                                    const LocalUpdateParams& params);

// Drift safety at configuration time: tau*L_xx <= 1 and
// 4*tau^2*L_xx^2 <= eta_global^2 * J/(J-1). Throws ConfigError on violation.
void validate_drift_safety(const LocalUpdateParams& params, double l_xx);

}  // namespace scaffpd
