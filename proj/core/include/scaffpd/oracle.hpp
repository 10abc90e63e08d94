#pragma once

#include <Eigen/Dense>

#include "scaffpd/dual_geometry.hpp"
#include "scaffpd/federation.hpp"

namespace scaffpd {

struct SaddlePoint {
  Eigen::VectorXd x_star;
  Eigen::VectorXd lambda_star;
  double kkt_residual = 0.0;
  bool converged = false;
  long iterations = 0;
};

// Prox-fixed-point residual, zero exactly at a saddle:
//   |grad_x Phi(x, lambda)| + |lambda - dual_prox(geom, lambda, losses, 1)|
double kkt_residual(const Federation& fed, const DualGeometry& geom,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& lambda);

// Extragradient with exact gradients and an exact dual prox, step
// 1/(2*max(L_xx, L_lx)); iterates until the residual reaches tol or the
// iteration cap. Independent of the solver under test.
SaddlePoint solve_saddle_oracle(const Federation& fed,
                                const DualGeometry& geom, double tol = 1e-12,
                                long max_iters = 1000000);

// Same solver from a chosen start (multi-start agreement checks).
SaddlePoint solve_saddle_oracle_from(const Federation& fed,
                                     const DualGeometry& geom,
                                     const Eigen::VectorXd& x0,
                                     const Eigen::VectorXd& lambda0,
                                     double tol = 1e-12,
                                     long max_iters = 1000000);

}  // namespace scaffpd
