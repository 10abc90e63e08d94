#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "scaffpd/rng.hpp"

namespace scaffpd {

enum class NoiseKind { kDeterministic, kAdditiveGaussian, kMinibatch };

struct NoiseModel {
  NoiseKind kind = NoiseKind::kDeterministic;
  double zeta = 0.0;   // total gradient noise std (additive mode)
  int batch_size = 0;  // minibatch mode

  static NoiseModel deterministic() { return {}; }
  static NoiseModel additive_gaussian(double zeta) {
    return {NoiseKind::kAdditiveGaussian, zeta, 0};
  }
  static NoiseModel minibatch(int batch_size) {
    return {NoiseKind::kMinibatch, 0.0, batch_size};
  }
};

// One client's ridge-regression problem:
//   f(x) = (1/m) * sum_j (<a_j, x> - y_j)^2 + (ridge/2) * |x|^2
class ClientDataset {
 public:
  ClientDataset() = default;
  ClientDataset(Eigen::MatrixXd features, Eigen::VectorXd targets,
                double ridge, int client_id);

  int samples() const { return static_cast<int>(features_.rows()); }
  int dim() const { return static_cast<int>(features_.cols()); }
  int client_id() const { return client_id_; }
  double ridge() const { return ridge_; }
  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& targets() const { return targets_; }

  // Hessian (2/m) A^T A + ridge*I and linear term -(2/m) A^T y, cached so
  // gradient evaluation is a d x d matvec instead of two m x d passes.
  const Eigen::MatrixXd& hessian() const { return hessian_; }
  const Eigen::VectorXd& linear_term() const { return linear_; }

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd targets_;
  double ridge_ = 0.0;
  int client_id_ = 0;
  Eigen::MatrixXd hessian_;
  Eigen::VectorXd linear_;
};

struct Federation {
  std::vector<ClientDataset> clients;
  int dimension = 0;
  NoiseModel noise;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(clients.size()); }
};

struct SynthConfig {
  int n_clients = 0;
  int dim = 0;
  int m_per_client = 0;
  double concept_shift_sigma = 0.0;  // std of per-client ground-truth shift
  double base_scale = 1.0;           // std of the shared ground truth
  double ridge = 0.0;
  std::uint64_t seed = 0;
};

// Synthetic heterogeneous robust-regression federation. Identical seeds
// yield bit-identical federations.
Federation generate_synthetic(const SynthConfig& config);

double local_loss(const ClientDataset& client, const Eigen::VectorXd& x);

Eigen::VectorXd local_gradient_deterministic(const ClientDataset& client,
                                             const Eigen::VectorXd& x);

Eigen::VectorXd local_gradient(const ClientDataset& client,
                               const Eigen::VectorXd& x,
                               const NoiseModel& noise, RngStream& rng);

class DualGeometry;

// Phi(x, lambda) = sum_i lambda_i f_i(x)
double phi_value(const Federation& fed, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& lambda);

// F(x, lambda) = Phi(x, lambda) - psi(lambda); rejects infeasible lambda
double global_objective(const Federation& fed, const DualGeometry& geom,
                        const Eigen::VectorXd& x,
                        const Eigen::VectorXd& lambda);

// Single-document JSON export/import: {seed, N, d, clients:[...]}
std::string federation_to_json(const Federation& fed);
Federation federation_from_json(const std::string& text);

}  // namespace scaffpd
