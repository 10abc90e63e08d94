#pragma once

#include <Eigen/Dense>
#include <vector>

#include "scaffpd/dual_geometry.hpp"
#include "scaffpd/federation.hpp"

namespace scaffpd {

// Mean of the worst ceil(k*n) entries. higher_is_better selects the lowest
// entries (scores); otherwise the highest (losses).
double worst_fraction(const std::vector<double>& values, double k,
                      bool higher_is_better);

// Constants of the saddle problem, estimated from the data:
//   L_xx:  max over clients of the top Hessian eigenvalue (power iteration)
//   mu_x:  the ridge modulus
//   mu_lambda: from the geometry
//   L_lx:  2x the spectral norm of the matrix whose rows are grad f_i(x0)
struct ConstantEstimates {
  double mu_x = 0.0;
  double mu_lambda = 0.0;
  double l_xx = 0.0;
  double l_lambda_x = 0.0;
};

ConstantEstimates estimate_constants(const Federation& fed,
                                     const DualGeometry& geom,
                                     const Eigen::VectorXd& x0);

double top_eigenvalue(const Eigen::MatrixXd& sym, double tol = 1e-10);

// OLS slope of log(y) vs log(r) over entries [first, last).
double loglog_slope(const std::vector<double>& values, int first, int last);

}  // namespace scaffpd
