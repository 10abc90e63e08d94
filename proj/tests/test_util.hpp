#pragma once

#include <Eigen/Dense>

#include "scaffpd/dual_geometry.hpp"
#include "scaffpd/federation.hpp"
#include "scaffpd/rng.hpp"

namespace scaffpd::testutil {

inline Eigen::VectorXd random_vector(RngStream& rng, int n,
                                     double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

// random interior point of the simplex (normalized squared normals)
inline Eigen::VectorXd random_simplex_point(RngStream& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    v[i] = z * z + 1e-3;
  }
  return v / v.sum();
}

inline SynthConfig paper_synth(std::uint64_t seed = 7) {
  SynthConfig c;
  c.n_clients = 5;
  c.dim = 10;
  c.m_per_client = 100;
  c.concept_shift_sigma = 0.1;
  c.base_scale = 1.0;
  c.ridge = 0.1;
  c.seed = seed;
  return c;
}

// uniform-weight ridge minimizer, by the normal equations
inline Eigen::VectorXd uniform_ridge_solution(const Federation& fed) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(fed.dimension, fed.dimension);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(fed.dimension);
  for (const auto& c : fed.clients) {
    h += c.hessian() / fed.size();
    l += c.linear_term() / fed.size();
  }
  return h.ldlt().solve(-l);
}

}  // namespace scaffpd::testutil
