#include "scaffpd/schedule.hpp"

#include <cmath>

#include "scaffpd/errors.hpp"

namespace scaffpd {

namespace {

void check_constants(const ProblemConstants& c) {
  if (!(c.l_xx > 0.0) || !std::isfinite(c.l_xx))
    throw ConfigError("primal smoothness constant must be finite and > 0");
  if (!(c.mu_x >= 0.0) || !(c.mu_lambda >= 0.0) || !(c.l_lambda_x >= 0.0) ||
      !(c.zeta >= 0.0))
    throw ConfigError("problem constants must be >= 0");
  if (c.mu_x > c.l_xx * (1.0 + 1e-12))
    throw ConfigError("strong convexity cannot exceed smoothness");
}

}  // namespace

ScheduleState scc_schedule_init(const ProblemConstants& constants,
                                double gamma0, double delta, double c_alpha,
                                double tau_cap) {
  check_constants(constants);
  if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be > 0");
  if (!(delta > 0.0 && delta < 1.0) || !(c_alpha > 0.0 && c_alpha < 1.0) ||
      delta + c_alpha > 1.0)
    throw ConfigError("schedule slack parameters must satisfy "
                      "delta, c_alpha in (0,1) with delta + c_alpha <= 1");
  const double a = 2.0 * constants.l_lambda_x * constants.l_lambda_x *
                   gamma0 / c_alpha;
  const double b = 12.0 * constants.l_xx;
  const double rhs = 1.0 - delta;
  double tau0;
  if (a == 0.0) {
    tau0 = rhs / b;
  } else {
    tau0 = (-b + std::sqrt(b * b + 4.0 * a * rhs)) / (2.0 * a);
  }
  if (tau_cap > 0.0 && tau0 > tau_cap) tau0 = tau_cap;
  ScheduleState state;
  state.mode = ScheduleMode::kScc;
  state.tau = tau0;
  state.gamma = gamma0;
  state.sigma = gamma0 * tau0;
  state.theta = 1.0;
  state.round = 0;
  state.constants = constants;
  return state;
}

ScheduleState scc_schedule_step(const ScheduleState& state) {
  if (state.mode != ScheduleMode::kScc)
    throw ConfigError("growing schedule step applied to a constant schedule");
  ScheduleState next = state;
  const double growth = 1.0 + state.constants.mu_x * state.tau;
  next.gamma = state.gamma * growth;
  next.tau = state.tau / std::sqrt(growth);
  next.sigma = next.gamma * next.tau;
  next.theta = state.sigma / next.sigma;
  next.round = state.round + 1;
  return next;
}

ScheduleState scsc_schedule(const ProblemConstants& constants, double epsilon,
                            double c_omega, double c_zeta, double tau_cap) {
  check_constants(constants);
  if (!(constants.mu_x > 0.0))
    throw ConfigError("constant schedule needs a strongly convex primal");
  if (!(constants.mu_lambda > 0.0))
    throw ConfigError(
        "constant schedule needs a strongly concave dual; use the growing "
        "schedule instead");
  if (!(epsilon > 0.0)) throw ConfigError("target accuracy must be > 0");
  if (!(c_omega >= 1.0)) throw ConfigError("omega multiplier must be >= 1");
  const double base = 0.5 + 24.0 * constants.l_xx / constants.mu_x;
  const double cross = 16.0 * constants.l_lambda_x * constants.l_lambda_x /
                       (constants.mu_x * constants.mu_lambda);
  double omega = c_omega * (base + std::sqrt(base * base + cross));
  if (constants.zeta > 0.0) {
    omega = std::max(omega, c_zeta * constants.zeta * constants.zeta /
                                (constants.mu_x * epsilon));
  }
  // tau = (4/mu_x)/(omega - 1) decreases in omega; raise omega to honor the
  // drift-safety cap when needed
  if (tau_cap > 0.0) {
    const double omega_floor = 1.0 + 4.0 / (constants.mu_x * tau_cap);
    omega = std::max(omega, omega_floor);
  }
  const double theta = 1.0 - 1.0 / omega;
  const double ratio = (1.0 - theta) / theta;
  ScheduleState state;
  state.mode = ScheduleMode::kScsc;
  state.tau = 4.0 / constants.mu_x * ratio;
  state.sigma = ratio / constants.mu_lambda;
  state.theta = theta;
  state.gamma = 0.0;
  state.round = 0;
  state.constants = constants;
  return state;
}

ScheduleState manual_schedule(double tau, double sigma, double theta) {
  if (!(tau > 0.0) || !(sigma > 0.0))
    throw ConfigError("manual step sizes must be > 0");
  if (!(theta >= 0.0 && theta <= 1.0))
    throw ConfigError("extrapolation weight must lie in [0, 1]");
  ScheduleState state;
  state.mode = ScheduleMode::kManual;
  state.tau = tau;
  state.sigma = sigma;
  state.theta = theta;
  return state;
}

Eigen::VectorXd extrapolate_dual_gradient(const Eigen::VectorXd& cur,
                                          const Eigen::VectorXd& prev,
                                          double theta) {
  if (cur.size() != prev.size())
    throw ConfigError("dual gradient dimension mismatch");
  return (1.0 + theta) * cur - theta * prev;
}

Eigen::VectorXd primal_aggregate(const Eigen::VectorXd& x,
                                 const std::vector<Eigen::VectorXd>& deltas,
                                 const Eigen::VectorXd& lambda, double tau) {
  if (static_cast<int>(deltas.size()) != lambda.size())
    throw ConfigError("per-client update count mismatch");
  Eigen::VectorXd direction = Eigen::VectorXd::Zero(x.size());
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i].size() != x.size())
      throw ConfigError("client update dimension mismatch");
    direction += lambda[static_cast<int>(i)] * deltas[i];
  }
  return x - tau * direction;
}

}  // namespace scaffpd
