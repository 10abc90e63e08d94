#include "scaffpd/solver.hpp"

#include <algorithm>
#include <future>
#include <vector>

#include "scaffpd/errors.hpp"
#include "scaffpd/metrics.hpp"

namespace scaffpd {

namespace {

template <typename Fn>
void for_each_client(int n, bool parallel, Fn&& fn) {
  if (!parallel || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(n);
  for (int i = 0; i < n; ++i)
    futures.push_back(std::async(std::launch::async, fn, i));
  for (auto& f : futures) f.get();
}

}  // namespace

Trace run_scaffpd(const Federation& fed, const DualGeometry& geom,
                  int local_steps, double eta_global,
                  const ScheduleState& schedule, const Eigen::VectorXd& x0,
                  const Eigen::VectorXd& lambda0, int rounds,
                  const RunOptions& options) {
  if (rounds < 1) throw ConfigError("round count must be >= 1");
  if (geom.n() != fed.size())
    throw ConfigError("geometry and federation disagree on client count");
  if (!geom.bounded())
    throw ConfigError("solver needs a bounded weight set");
  if (schedule.mode == ScheduleMode::kScsc && geom.mu_lambda() <= 0.0)
    throw ConfigError(
        "constant schedule needs a strongly concave dual; use the growing "
        "schedule instead");
  geom.require_feasible(lambda0);
  if (x0.size() != fed.dimension)
    throw ConfigError("start iterate dimension mismatch");

  const int n = fed.size();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd lambda = lambda0;
  ScheduleState sched = schedule;

  Trace trace;
  trace.rounds.reserve(rounds);
  Eigen::VectorXd prev_losses;

  std::vector<Eigen::VectorXd> grads(n);
  std::vector<Eigen::VectorXd> deltas(n);
  Eigen::VectorXd losses(n);

  for (int r = 0; r < rounds; ++r) {
    LocalUpdateParams params;
    params.steps = local_steps;
    params.eta_global = eta_global;
    params.eta_local = sched.tau / (local_steps * eta_global);
    if (sched.constants.l_xx > 0.0)
      validate_drift_safety(params, sched.constants.l_xx);

    for_each_client(n, options.parallel_clients, [&](int i) {
      ClientReport report =
          client_report(fed, i, x, static_cast<std::uint64_t>(r));
      losses[i] = report.loss;
      grads[i] = std::move(report.grad);
    });
    if (r == 0) prev_losses = losses;

    const Eigen::VectorXd s =
        extrapolate_dual_gradient(losses, prev_losses, sched.theta);
    lambda = dual_prox(geom, lambda, s, sched.sigma);

    Eigen::VectorXd c = Eigen::VectorXd::Zero(fed.dimension);
    for (int i = 0; i < n; ++i) c += lambda[i] * grads[i];

    for_each_client(n, options.parallel_clients, [&](int i) {
      deltas[i] = local_update(fed, i, x, grads[i], c, params,
                               static_cast<std::uint64_t>(r));
    });

    RoundSnapshot snap;
    snap.round = r;
    snap.tau = sched.tau;
    snap.sigma = sched.sigma;
    snap.theta = sched.theta;
    snap.x = x;
    snap.dual_grad = losses;
    snap.s = s;
    snap.lambda = lambda;

    x = primal_aggregate(x, deltas, lambda, sched.tau);
    if (!x.allFinite() || x.norm() > options.divergence_norm)
      throw DivergenceError("primal iterate diverged at round " +
                            std::to_string(r));

    snap.metrics["avg_loss"] = losses.mean();
    snap.metrics["worst20_loss"] = worst_fraction(
        std::vector<double>(losses.data(), losses.data() + n), 0.2, false);
    snap.metrics["lambda_max"] = lambda.maxCoeff();
    snap.metrics["lambda_min"] = lambda.minCoeff();
    snap.metrics["psi_value"] = psi_value(geom, lambda);
    const bool sampled =
        (r % std::max(1, options.metrics_stride) == 0) || r + 1 == rounds;
    if (sampled)
      for (const auto& hook : options.hooks) hook(fed, geom, snap);
    trace.rounds.push_back(std::move(snap));

    prev_losses = losses;
    if (sched.mode == ScheduleMode::kScc) sched = scc_schedule_step(sched);
  }

  trace.final_x = x;
  trace.final_lambda = lambda;
  return trace;
}

}  // namespace scaffpd
