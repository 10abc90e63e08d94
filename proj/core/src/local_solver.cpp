#include "scaffpd/local_solver.hpp"

#include <cmath>

#include "scaffpd/errors.hpp"

namespace scaffpd {

namespace {

void check_params(const LocalUpdateParams& params) {
  if (params.steps < 1) throw ConfigError("local step count must be >= 1");
  if (!(params.eta_local > 0.0))
    throw ConfigError("local step size must be > 0");
  if (!(params.eta_global >= 1.0))
    throw ConfigError("global step multiplier must be >= 1");
}

const ClientDataset& client_at(const Federation& fed, int client_id) {
  if (client_id < 0 || client_id >= fed.size())
    throw ConfigError("client id out of range");
  return fed.clients[client_id];
}

}  // namespace

ClientReport client_report(const Federation& fed, int client_id,
                           const Eigen::VectorXd& x, std::uint64_t round) {
  const ClientDataset& client = client_at(fed, client_id);
  RngStream rng(fed.seed, static_cast<std::uint64_t>(client_id), round, 0);
  ClientReport report;
  report.loss = local_loss(client, x);
  report.grad = local_gradient(client, x, fed.noise, rng);
  return report;
}

Eigen::VectorXd local_update(const Federation& fed, int client_id,
                             const Eigen::VectorXd& x,
                             const Eigen::VectorXd& c_i,
                             const Eigen::VectorXd& c,
                             const LocalUpdateParams& params,
                             std::uint64_t round) {
  check_params(params);
  const ClientDataset& client = client_at(fed, client_id);
  if (c_i.size() != x.size() || c.size() != x.size())
    throw ConfigError("control variate dimension mismatch");
  Eigen::VectorXd u = x;
  for (int j = 1; j <= params.steps; ++j) {
    RngStream rng(fed.seed, static_cast<std::uint64_t>(client_id), round,
                  static_cast<std::uint64_t>(j));
    u -= params.eta_local * (local_gradient(client, u, fed.noise, rng) -
                             c_i + c);
    if (!u.allFinite())
      throw DivergenceError("local iterate diverged (non-finite)");
  }
  return (x - u) / (params.eta_local * params.steps);
}

Eigen::VectorXd expected_local_path(const Federation& fed, int client_id,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& c_i,
                                    const Eigen::VectorXd& c,
                                    const LocalUpdateParams& params) {
  check_params(params);
  const ClientDataset& client = client_at(fed, client_id);
  Eigen::VectorXd u = x;
  for (int j = 0; j < params.steps; ++j) {
    u -= params.eta_local *
         (local_gradient_deterministic(client, u) - c_i + c);
    if (!u.allFinite())
      throw DivergenceError("local iterate diverged (non-finite)");
  }
  return (x - u) / (params.eta_local * params.steps);
}

void validate_drift_safety(const LocalUpdateParams& params, double l_xx) {
  check_params(params);
  const double tau = params.tau();
  if (tau * l_xx > 1.0 + 1e-12)
    throw ConfigError("unsafe step: tau * L_xx exceeds 1");
  if (params.steps > 1) {
    const double lhs = 4.0 * tau * tau * l_xx * l_xx;
    const double rhs = params.eta_global * params.eta_global *
                       double(params.steps) / double(params.steps - 1);
    if (lhs > rhs * (1.0 + 1e-12))
      throw ConfigError("unsafe step: local drift bound violated");
  }
}

}  // namespace scaffpd
