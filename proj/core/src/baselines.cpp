#include "scaffpd/baselines.hpp"

#include <algorithm>
#include <vector>

#include "scaffpd/errors.hpp"
#include "scaffpd/metrics.hpp"

namespace scaffpd {

namespace {

void check_config(const BaselineConfig& config) {
  if (config.steps < 1) throw ConfigError("local step count must be >= 1");
  if (!(config.eta_local > 0.0))
    throw ConfigError("local step size must be > 0");
  if (!(config.eta_global >= 1.0))
    throw ConfigError("global step multiplier must be >= 1");
}

void fill_builtin_metrics(RoundSnapshot& snap, const Eigen::VectorXd& losses,
                          const Eigen::VectorXd& lambda, double psi) {
  const int n = static_cast<int>(losses.size());
  snap.metrics["avg_loss"] = losses.mean();
  snap.metrics["worst20_loss"] = worst_fraction(
      std::vector<double>(losses.data(), losses.data() + n), 0.2, false);
  snap.metrics["lambda_max"] = lambda.maxCoeff();
  snap.metrics["lambda_min"] = lambda.minCoeff();
  snap.metrics["psi_value"] = psi;
}

// Shared round loop for the uncorrected/corrected uniform baselines and the
// prox-GDA variant. The two flags restore the dual extrapolation and the
// control variates; with both on and a matching manual schedule the loop is
// operation-for-operation the accelerated solver.
Trace run_rounds(const Federation& fed, const DualGeometry* geom,
                 const BaselineConfig& config, const Eigen::VectorXd& x0,
                 const Eigen::VectorXd& lambda0, int rounds, bool correct_drift,
                 bool weighted_dual, bool extrapolate, bool control_variates,
                 double theta, const RunOptions& options) {
  check_config(config);
  if (rounds < 1) throw ConfigError("round count must be >= 1");
  if (x0.size() != fed.dimension)
    throw ConfigError("start iterate dimension mismatch");
  const int n = fed.size();
  const double tau = config.steps * config.eta_local * config.eta_global;

  LocalUpdateParams params;
  params.eta_local = config.eta_local;
  params.steps = config.steps;
  params.eta_global = config.eta_global;

  Eigen::VectorXd x = x0;
  Eigen::VectorXd lambda = lambda0;
  Eigen::VectorXd prev_losses;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(fed.dimension);

  Trace trace;
  trace.rounds.reserve(rounds);
  std::vector<Eigen::VectorXd> grads(n);
  std::vector<Eigen::VectorXd> deltas(n);
  Eigen::VectorXd losses(n);

  for (int r = 0; r < rounds; ++r) {
    for (int i = 0; i < n; ++i) {
      ClientReport report =
          client_report(fed, i, x, static_cast<std::uint64_t>(r));
      losses[i] = report.loss;
      grads[i] = std::move(report.grad);
    }
    if (r == 0) prev_losses = losses;

    double sigma_used = 0.0;
    if (weighted_dual) {
      const Eigen::VectorXd s =
          extrapolate ? extrapolate_dual_gradient(losses, prev_losses, theta)
                      : losses;
      if (!(config.dual_step > 0.0))
        throw ConfigError("dual step must be > 0");
      lambda = dual_prox(*geom, lambda, s, config.dual_step);
      sigma_used = config.dual_step;
    }

    Eigen::VectorXd c = zero;
    if (correct_drift || control_variates)
      for (int i = 0; i < n; ++i) c += lambda[i] * grads[i];

    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd& c_i =
          (correct_drift || control_variates) ? grads[i] : zero;
      const Eigen::VectorXd& c_used =
          (correct_drift || control_variates) ? c : zero;
      deltas[i] = local_update(fed, i, x, c_i, c_used, params,
                               static_cast<std::uint64_t>(r));
    }

    RoundSnapshot snap;
    snap.round = r;
    snap.tau = tau;
    snap.sigma = sigma_used;
    snap.theta = extrapolate ? theta : 0.0;
    snap.x = x;
    snap.dual_grad = losses;
    snap.s = losses;
    snap.lambda = lambda;

    x = primal_aggregate(x, deltas, lambda, tau);
    if (!x.allFinite() || x.norm() > options.divergence_norm)
      throw DivergenceError("primal iterate diverged at round " +
                            std::to_string(r));

    fill_builtin_metrics(snap, losses, lambda,
                         geom ? psi_value(*geom, lambda) : 0.0);
    const bool sampled =
        (r % std::max(1, options.metrics_stride) == 0) || r + 1 == rounds;
    if (sampled && geom)
      for (const auto& hook : options.hooks) hook(fed, *geom, snap);
    trace.rounds.push_back(std::move(snap));
    prev_losses = losses;
  }

  trace.final_x = x;
  trace.final_lambda = lambda;
  return trace;
}

}  // namespace

Trace run_fedavg(const Federation& fed, const BaselineConfig& config,
                 const Eigen::VectorXd& x0, int rounds,
                 const RunOptions& options) {
  const Eigen::VectorXd uniform =
      Eigen::VectorXd::Constant(fed.size(), 1.0 / fed.size());
  return run_rounds(fed, nullptr, config, x0, uniform, rounds,
                    /*correct_drift=*/false, /*weighted_dual=*/false,
                    /*extrapolate=*/false, /*control_variates=*/false, 0.0,
                    options);
}

Trace run_scaffold(const Federation& fed, const BaselineConfig& config,
                   const Eigen::VectorXd& x0, int rounds,
                   const RunOptions& options) {
  const Eigen::VectorXd uniform =
      Eigen::VectorXd::Constant(fed.size(), 1.0 / fed.size());
  return run_rounds(fed, nullptr, config, x0, uniform, rounds,
                    /*correct_drift=*/true, /*weighted_dual=*/false,
                    /*extrapolate=*/false, /*control_variates=*/false, 0.0,
                    options);
}

Trace run_pd_fedavg(const Federation& fed, const DualGeometry& geom,
                    const BaselineConfig& config, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& lambda0, int rounds,
                    const RunOptions& options) {
  if (!geom.bounded())
    throw ConfigError("weighted baseline needs a bounded weight set");
  geom.require_feasible(lambda0);
  return run_rounds(fed, &geom, config, x0, lambda0, rounds,
                    /*correct_drift=*/false, /*weighted_dual=*/true,
                    /*extrapolate=*/false, /*control_variates=*/false, 0.0,
                    options);
}

Trace run_pd_fedavg_flags(const Federation& fed, const DualGeometry& geom,
                          const BaselineConfig& config,
                          const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& lambda0, int rounds,
                          bool extrapolate, bool control_variates,
                          double theta, const RunOptions& options) {
  if (!geom.bounded())
    throw ConfigError("weighted baseline needs a bounded weight set");
  geom.require_feasible(lambda0);
  return run_rounds(fed, &geom, config, x0, lambda0, rounds,
                    /*correct_drift=*/false, /*weighted_dual=*/true,
                    extrapolate, control_variates, theta, options);
}

}  // namespace scaffpd
