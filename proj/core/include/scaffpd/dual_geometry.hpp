#pragma once

#include <Eigen/Dense>

namespace scaffpd {

enum class GeometryKind { kChi2, kCvar, kQfl };

// The regularizer/constraint pair (psi, Lambda) on the client weights.
//   chi2: psi = (rho/2N) sum (N*l_i - 1)^2 on the simplex; rho=0 is the
//         unregularized worst-case-mixture objective
//   cvar: psi = 0 on the capped simplex {l in simplex : l_i <= 1/(alpha N)}
//   qfl:  psi = |l|^(1+1/q) on R^N; value-only, no prox (unbounded domain)
class DualGeometry {
 public:
  static DualGeometry chi2(int n, double rho);
  static DualGeometry cvar(int n, double alpha);
  static DualGeometry qfl(int n, double q);

  GeometryKind kind() const { return kind_; }
  int n() const { return n_; }
  double rho() const { return rho_; }
  double alpha() const { return alpha_; }
  double q() const { return q_; }

  // strong-concavity modulus of the dual block: rho*N for chi2, else 0
  double mu_lambda() const;
  double cap() const;  // cvar per-coordinate cap 1/(alpha N)
  bool bounded() const { return kind_ != GeometryKind::kQfl; }

  bool is_feasible(const Eigen::VectorXd& lambda, double tol = 1e-9) const;
  void require_feasible(const Eigen::VectorXd& lambda,
                        double tol = 1e-9) const;

  Eigen::VectorXd uniform_weights() const;

 private:
  DualGeometry(GeometryKind kind, int n) : kind_(kind), n_(n) {}
  GeometryKind kind_;
  int n_;
  double rho_ = 0.0;
  double alpha_ = 1.0;
  double q_ = 1.0;
};

double psi_value(const DualGeometry& geom, const Eigen::VectorXd& lambda);

// Euclidean projection onto the probability simplex (sort-and-threshold,
// descending order with index tie-break for determinism).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

// Euclidean projection onto {l in simplex : l_i <= cap}; requires N*cap >= 1.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double cap);

// Exact minimizer of psi(l) - <s, l> + |l - lambda_prev|^2 / (2*sigma)
// over Lambda.
Eigen::VectorXd dual_prox(const DualGeometry& geom,
                          const Eigen::VectorXd& lambda_prev,
                          const Eigen::VectorXd& s, double sigma);

// max over Lambda of sum lambda_i^2; throws for unbounded Lambda
double chi_coefficient(const DualGeometry& geom);

}  // namespace scaffpd
