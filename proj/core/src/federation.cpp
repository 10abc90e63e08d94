#include "scaffpd/federation.hpp"

#include <json.hpp>
#include <numeric>
#include <utility>
#include <vector>

#include "scaffpd/dual_geometry.hpp"
#include "scaffpd/errors.hpp"

namespace scaffpd {

namespace {

// compensated summation so loss aggregation holds up at 1e-12 tolerances
class KahanSum {
 public:
  void add(double v) {
    const double y = v - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace

ClientDataset::ClientDataset(Eigen::MatrixXd features, Eigen::VectorXd targets,
                             double ridge, int client_id)
    : features_(std::move(features)),
      targets_(std::move(targets)),
      ridge_(ridge),
      client_id_(client_id) {
  if (features_.rows() < 1 || features_.cols() < 1)
    throw ConfigError("client dataset must be non-empty");
  if (features_.rows() != targets_.size())
    throw ConfigError("feature/target row counts differ");
  if (!(ridge_ >= 0.0)) throw ConfigError("ridge must be >= 0");
  const double m = static_cast<double>(features_.rows());
  hessian_ = (2.0 / m) * (features_.transpose() * features_);
  hessian_.diagonal().array() += ridge_;
  linear_ = -(2.0 / m) * (features_.transpose() * targets_);
}

Federation generate_synthetic(const SynthConfig& config) {
  if (config.n_clients < 1 || config.dim < 1 || config.m_per_client < 1)
    throw ConfigError("client count, dimension and samples must be positive");
  if (!(config.concept_shift_sigma >= 0.0))
    throw ConfigError("concept shift sigma must be >= 0");
  if (!(config.ridge >= 0.0)) throw ConfigError("ridge must be >= 0");

  const int d = config.dim;
  Eigen::VectorXd truth(d);
  {
    RngStream rng(config.seed, 0, rng_tag::kGroundTruth, 0);
    for (int k = 0; k < d; ++k) truth[k] = config.base_scale * rng.normal();
  }

  Federation fed;
  fed.dimension = d;
  fed.seed = config.seed;
  fed.clients.reserve(config.n_clients);
  for (int i = 0; i < config.n_clients; ++i) {
    Eigen::VectorXd shift(d);
    {
      RngStream rng(config.seed, static_cast<std::uint64_t>(i),
                    rng_tag::kConceptShift, 0);
      for (int k = 0; k < d; ++k)
        shift[k] = config.concept_shift_sigma * rng.normal();
    }
    Eigen::MatrixXd features(config.m_per_client, d);
    {
      RngStream rng(config.seed, static_cast<std::uint64_t>(i),
                    rng_tag::kFeatures, 0);
      for (int r = 0; r < config.m_per_client; ++r)
        for (int k = 0; k < d; ++k) features(r, k) = rng.normal();
    }
    const Eigen::VectorXd targets = features * (truth + shift);
    fed.clients.emplace_back(std::move(features), targets, config.ridge, i);
  }
  return fed;
}

double local_loss(const ClientDataset& client, const Eigen::VectorXd& x) {
  if (x.size() != client.dim())
    throw ConfigError("iterate dimension mismatch");
  const Eigen::VectorXd residual = client.features() * x - client.targets();
  KahanSum acc;
  for (int j = 0; j < residual.size(); ++j)
    acc.add(residual[j] * residual[j]);
  return acc.value() / client.samples() +
         0.5 * client.ridge() * x.squaredNorm();
}

Eigen::VectorXd local_gradient_deterministic(const ClientDataset& client,
                                             const Eigen::VectorXd& x) {
  if (x.size() != client.dim())
    throw ConfigError("iterate dimension mismatch");
  return client.hessian() * x + client.linear_term();
}

Eigen::VectorXd local_gradient(const ClientDataset& client,
                               const Eigen::VectorXd& x,
                               const NoiseModel& noise, RngStream& rng) {
  switch (noise.kind) {
    case NoiseKind::kDeterministic:
      return local_gradient_deterministic(client, x);
    case NoiseKind::kAdditiveGaussian: {
      Eigen::VectorXd g = local_gradient_deterministic(client, x);
      if (noise.zeta > 0.0) {
        const double scale = noise.zeta / std::sqrt(double(client.dim()));
        for (int k = 0; k < g.size(); ++k) g[k] += scale * rng.normal();
      }
      return g;
    }
    case NoiseKind::kMinibatch: {
      if (x.size() != client.dim())
        throw ConfigError("iterate dimension mismatch");
      const int m = client.samples();
      const int b = noise.batch_size;
      if (b < 1 || b > m) throw ConfigError("bad minibatch size");
      // partial Fisher-Yates: first b entries are a uniform subset
      std::vector<int> idx(m);
      std::iota(idx.begin(), idx.end(), 0);
      for (int j = 0; j < b; ++j) {
        const int k =
            j + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - j)));
        std::swap(idx[j], idx[k]);
      }
      Eigen::VectorXd g = client.ridge() * x;
      for (int j = 0; j < b; ++j) {
        const auto row = client.features().row(idx[j]);
        const double r = row.dot(x) - client.targets()[idx[j]];
        g += (2.0 / b) * r * row.transpose();
      }
      return g;
    }
  }
  throw ConfigError("unknown noise model");
}

double phi_value(const Federation& fed, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& lambda) {
  if (lambda.size() != fed.size())
    throw ConfigError("weight vector length mismatch");
  KahanSum acc;
  for (int i = 0; i < fed.size(); ++i)
    acc.add(lambda[i] * local_loss(fed.clients[i], x));
  return acc.value();
}

double global_objective(const Federation& fed, const DualGeometry& geom,
                        const Eigen::VectorXd& x,
                        const Eigen::VectorXd& lambda) {
  geom.require_feasible(lambda);
  return phi_value(fed, x, lambda) - psi_value(geom, lambda);
}

std::string federation_to_json(const Federation& fed) {
  nlohmann::json doc;
  doc["seed"] = fed.seed;
  doc["N"] = fed.size();
  doc["d"] = fed.dimension;
  auto& clients = doc["clients"] = nlohmann::json::array();
  for (const auto& c : fed.clients) {
    nlohmann::json jc;
    jc["client_id"] = c.client_id();
    jc["ridge"] = c.ridge();
    jc["m"] = c.samples();
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(c.samples()) * c.dim());
    for (int r = 0; r < c.samples(); ++r)
      for (int k = 0; k < c.dim(); ++k) flat.push_back(c.features()(r, k));
    jc["features"] = flat;
    jc["targets"] =
        std::vector<double>(c.targets().data(),
                            c.targets().data() + c.targets().size());
    clients.push_back(std::move(jc));
  }
  return doc.dump();
}

Federation federation_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad federation document: ") + e.what());
  }
  Federation fed;
  try {
    fed.seed = doc.at("seed").get<std::uint64_t>();
    fed.dimension = doc.at("d").get<int>();
    const int n = doc.at("N").get<int>();
    for (const auto& jc : doc.at("clients")) {
      const int m = jc.at("m").get<int>();
      const auto flat = jc.at("features").get<std::vector<double>>();
      if (static_cast<int>(flat.size()) != m * fed.dimension)
        throw ConfigError("feature block has wrong size");
      Eigen::MatrixXd features(m, fed.dimension);
      for (int r = 0; r < m; ++r)
        for (int k = 0; k < fed.dimension; ++k)
          features(r, k) = flat[static_cast<size_t>(r) * fed.dimension + k];
      const auto tv = jc.at("targets").get<std::vector<double>>();
      Eigen::VectorXd targets =
          Eigen::Map<const Eigen::VectorXd>(tv.data(), tv.size());
      fed.clients.emplace_back(std::move(features), std::move(targets),
                               jc.at("ridge").get<double>(),
                               jc.at("client_id").get<int>());
    }
    if (fed.size() != n) throw ConfigError("client count mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad federation document: ") + e.what());
  }
  return fed;
}

}  // namespace scaffpd
