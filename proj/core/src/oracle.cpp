#include "scaffpd/oracle.hpp"

#include <cmath>

#include "scaffpd/errors.hpp"
#include "scaffpd/metrics.hpp"

namespace scaffpd {

namespace {

Eigen::VectorXd primal_gradient(const Federation& fed,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& lambda) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (int i = 0; i < fed.size(); ++i)
    g += lambda[i] * local_gradient_deterministic(fed.clients[i], x);
  return g;
}

Eigen::VectorXd loss_vector(const Federation& fed, const Eigen::VectorXd& x) {
  Eigen::VectorXd losses(fed.size());
  for (int i = 0; i < fed.size(); ++i)
    losses[i] = local_loss(fed.clients[i], x);
  return losses;
}

// best-response primal: x(lambda) minimizes the weighted quadratic exactly
Eigen::VectorXd primal_best_response(const Federation& fed,
                                     const Eigen::VectorXd& lambda) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(fed.dimension, fed.dimension);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(fed.dimension);
  for (int i = 0; i < fed.size(); ++i) {
    h += lambda[i] * fed.clients[i].hessian();
    l += lambda[i] * fed.clients[i].linear_term();
  }
  return h.ldlt().solve(-l);
}

}  // namespace

double kkt_residual(const Federation& fed, const DualGeometry& geom,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& lambda) {
  geom.require_feasible(lambda);
  const Eigen::VectorXd losses = loss_vector(fed, x);
  const Eigen::VectorXd fixed = dual_prox(geom, lambda, losses, 1.0);
  return primal_gradient(fed, x, lambda).norm() + (lambda - fixed).norm();
}

SaddlePoint solve_saddle_oracle_from(const Federation& fed,
                                     const DualGeometry& geom,
                                     const Eigen::VectorXd& x0,
                                     const Eigen::VectorXd& lambda0,
                                     double tol, long max_iters) {
  if (!geom.bounded())
    throw ConfigError("saddle oracle needs a bounded weight set");
  if (fed.noise.kind != NoiseKind::kDeterministic)
    throw ConfigError("saddle oracle needs deterministic gradients");
  geom.require_feasible(lambda0);

  const ConstantEstimates est = estimate_constants(fed, geom, x0);
  const double step = 1.0 / (2.0 * std::max(est.l_xx, est.l_lambda_x));

  SaddlePoint best;
  best.x_star = x0;
  best.lambda_star = lambda0;
  best.kkt_residual = kkt_residual(fed, geom, x0, lambda0);
  best.converged = best.kkt_residual <= tol;

  Eigen::VectorXd x = x0;
  Eigen::VectorXd lambda = lambda0;
  long it = 0;
  for (; it < max_iters && !best.converged; ++it) {
    // extragradient: probe step, then the real step from the probe's field
    const Eigen::VectorXd xm = x - step * primal_gradient(fed, x, lambda);
    const Eigen::VectorXd lm =
        dual_prox(geom, lambda, loss_vector(fed, x), step);
    x -= step * primal_gradient(fed, xm, lm);
    lambda = dual_prox(geom, lambda, loss_vector(fed, xm), step);
    if (!x.allFinite())
      throw DivergenceError("saddle oracle diverged (non-finite iterate)");
    if (it % 16 == 0 || it + 1 == max_iters) {
      const double res = kkt_residual(fed, geom, x, lambda);
      if (res < best.kkt_residual) {
        best.kkt_residual = res;
        best.x_star = x;
        best.lambda_star = lambda;
      }
      best.converged = res <= tol;
    }
  }

  // Dual polish when extrapolated steps stall short of tol: ascend the
  // concave reduced objective g(lambda) = min_x Phi(x, lambda) - psi(lambda)
  // with exact inner minimization. Curvature of g is at most L_lx^2 / mu_x.
  if (!best.converged && est.mu_x > 0.0) {
    const double l_g =
        est.l_lambda_x * est.l_lambda_x / est.mu_x + est.mu_lambda;
    const double dual_step = 1.0 / std::max(l_g, 1e-12);
    lambda = best.lambda_star;
    for (long j = 0; j < max_iters / 4 && !best.converged; ++j, ++it) {
      x = primal_best_response(fed, lambda);
      lambda = dual_prox(geom, lambda, loss_vector(fed, x), dual_step);
      if (j % 16 == 0) {
        x = primal_best_response(fed, lambda);
        const double res = kkt_residual(fed, geom, x, lambda);
        if (res < best.kkt_residual) {
          best.kkt_residual = res;
          best.x_star = x;
          best.lambda_star = lambda;
        }
        best.converged = res <= tol;
      }
    }
  }
  best.iterations = it;
  return best;
}

SaddlePoint solve_saddle_oracle(const Federation& fed,
                                const DualGeometry& geom, double tol,
                                long max_iters) {
  return solve_saddle_oracle_from(fed, geom,
                                  Eigen::VectorXd::Zero(fed.dimension),
                                  geom.uniform_weights(), tol, max_iters);
}

}  // namespace scaffpd
