#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "scaffpd/dual_geometry.hpp"
#include "scaffpd/errors.hpp"
#include "scaffpd/federation.hpp"
#include "scaffpd/local_solver.hpp"
#include "scaffpd/oracle.hpp"
#include "test_util.hpp"

using namespace scaffpd;
using testutil::paper_synth;
using testutil::random_vector;

namespace {

Eigen::VectorXd finite_difference_gradient(const ClientDataset& client,
                                           const Eigen::VectorXd& x) {
  const double h = 1e-6;
  Eigen::VectorXd g(x.size());
  for (int k = 0; k < x.size(); ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (local_loss(client, xp) - local_loss(client, xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("synthetic generation shape and determinism") {
  const SynthConfig cfg = paper_synth();
  const Federation fed = generate_synthetic(cfg);
  REQUIRE(fed.size() == 5);
  CHECK(fed.dimension == 10);
  for (const auto& c : fed.clients) {
    CHECK(c.samples() == 100);
    CHECK(c.dim() == 10);
    CHECK(c.ridge() == doctest::Approx(0.1));
  }

  const Federation again = generate_synthetic(cfg);
  for (int i = 0; i < fed.size(); ++i) {
    CHECK((fed.clients[i].features() - again.clients[i].features()).norm() ==
          0.0);
    CHECK((fed.clients[i].targets() - again.clients[i].targets()).norm() ==
          0.0);
  }

  SynthConfig other = cfg;
  other.seed = 8;
  const Federation different = generate_synthetic(other);
  CHECK((fed.clients[0].features() - different.clients[0].features()).norm() >
        1.0);
}

TEST_CASE("generation rejects bad configs") {
  SynthConfig cfg = paper_synth();
  cfg.n_clients = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = paper_synth();
  cfg.dim = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = paper_synth();
  cfg.m_per_client = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = paper_synth();
  cfg.concept_shift_sigma = -0.1;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = paper_synth();
  cfg.ridge = -0.1;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}

TEST_CASE("zero concept shift pulls the saddle weights toward uniform") {
  SynthConfig shared = paper_synth(9);
  shared.concept_shift_sigma = 0.0;
  SynthConfig split = paper_synth(9);
  split.concept_shift_sigma = 1.0;
  const auto geom = DualGeometry::chi2(5, 0.5);
  const auto uniform = geom.uniform_weights();
  const auto s0 = solve_saddle_oracle(generate_synthetic(shared), geom, 1e-12);
  const auto s1 = solve_saddle_oracle(generate_synthetic(split), geom, 1e-12);
  REQUIRE(s0.converged);
  REQUIRE(s1.converged);
  CHECK((s0.lambda_star - uniform).norm() <
        0.2 * (s1.lambda_star - uniform).norm());
  CHECK((s0.lambda_star - uniform).norm() < 2e-2);
}

TEST_CASE("local loss") {
  SUBCASE("zero data gives zero loss") {
    ClientDataset c(Eigen::MatrixXd::Ones(3, 2), Eigen::VectorXd::Zero(3),
                    0.5, 0);
    CHECK(local_loss(c, Eigen::VectorXd::Zero(2)) == 0.0);
  }
  SUBCASE("single-sample hand value") {
    Eigen::MatrixXd a(1, 2);
    a << 1.0, 0.0;
    Eigen::VectorXd y(1);
    y << 1.0;
    ClientDataset c(a, y, 0.0, 0);
    Eigen::VectorXd x(2);
    x << 2.0, 0.0;
    CHECK(local_loss(c, x) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("own ridge minimizer is a lower bound") {
    const Federation fed = generate_synthetic(paper_synth(13));
    RngStream rng(1, 0, 0, 0);
    for (const auto& c : fed.clients) {
      const Eigen::VectorXd x_ls = c.hessian().ldlt().solve(-c.linear_term());
      const double floor = local_loss(c, x_ls);
      for (int t = 0; t < 20; ++t)
        CHECK(local_loss(c, random_vector(rng, 10, 2.0)) >= floor - 1e-12);
    }
  }
  SUBCASE("dimension mismatch") {
    const Federation fed = generate_synthetic(paper_synth());
    CHECK_THROWS_AS(local_loss(fed.clients[0], Eigen::VectorXd::Zero(3)),
                    ConfigError);
  }
}

TEST_CASE("deterministic gradient matches finite differences") {
  const Federation fed = generate_synthetic(paper_synth(21));
  RngStream rng(2, 0, 0, 0);
  for (int t = 0; t < 100; ++t) {
    const auto& client = fed.clients[rng.below(fed.size())];
    const Eigen::VectorXd x = random_vector(rng, 10, 1.5);
    const Eigen::VectorXd g = local_gradient_deterministic(client, x);
    const Eigen::VectorXd fd = finite_difference_gradient(client, x);
    CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("strong convexity with the ridge modulus") {
  const Federation fed = generate_synthetic(paper_synth(22));
  RngStream rng(3, 0, 0, 0);
  for (int t = 0; t < 100; ++t) {
    const auto& client = fed.clients[rng.below(fed.size())];
    const Eigen::VectorXd x1 = random_vector(rng, 10, 2.0);
    const Eigen::VectorXd x2 = random_vector(rng, 10, 2.0);
    const double secant =
        local_loss(client, x1) +
        local_gradient_deterministic(client, x1).dot(x2 - x1) +
        0.5 * client.ridge() * (x2 - x1).squaredNorm();
    CHECK(local_loss(client, x2) >= secant - 1e-10);
  }
}

TEST_CASE("stochastic gradient oracles") {
  const Federation fed = generate_synthetic(paper_synth(23));
  const auto& client = fed.clients[2];
  RngStream xrng(4, 0, 0, 0);
  const Eigen::VectorXd x = random_vector(xrng, 10, 1.0);
  const Eigen::VectorXd exact = local_gradient_deterministic(client, x);

  SUBCASE("zero noise degenerates to the exact gradient") {
    RngStream rng(fed.seed, 2, 0, 0);
    const Eigen::VectorXd g =
        local_gradient(client, x, NoiseModel::additive_gaussian(0.0), rng);
    CHECK((g - exact).norm() == 0.0);
  }

  SUBCASE("additive noise is unbiased with the declared variance") {
    const double zeta = 0.5;
    const NoiseModel noise = NoiseModel::additive_gaussian(zeta);
    const int draws = 10000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
    double second_moment = 0.0;
    for (int t = 0; t < draws; ++t) {
      RngStream rng(fed.seed, 2, t, 1);
      const Eigen::VectorXd g = local_gradient(client, x, noise, rng);
      mean += g / draws;
      second_moment += (g - exact).squaredNorm() / draws;
    }
    CHECK((mean - exact).norm() <= 4.0 * zeta / std::sqrt(double(draws)));
    CHECK(second_moment <= 1.5 * zeta * zeta);
    CHECK(second_moment >= 0.5 * zeta * zeta);
  }

  SUBCASE("minibatch draws are unbiased") {
    const NoiseModel noise = NoiseModel::minibatch(10);
    const int draws = 20000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
    for (int t = 0; t < draws; ++t) {
      RngStream rng(fed.seed, 2, t, 1);
      mean += local_gradient(client, x, noise, rng) / draws;
    }
    CHECK((mean - exact).norm() <= 0.05 * std::max(1.0, exact.norm()));
  }

  SUBCASE("identical keys give identical draws") {
    const NoiseModel noise = NoiseModel::additive_gaussian(0.3);
    RngStream a(fed.seed, 2, 5, 1);
    RngStream b(fed.seed, 2, 5, 1);
    CHECK((local_gradient(client, x, noise, a) -
           local_gradient(client, x, noise, b))
              .norm() == 0.0);
  }
}

TEST_CASE("client evaluation order cannot change draws") {
  const Federation fed = generate_synthetic(paper_synth(24));
  Federation noisy = fed;
  noisy.noise = NoiseModel::additive_gaussian(0.4);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(10);

  std::vector<Eigen::VectorXd> forward(noisy.size());
  for (int i = 0; i < noisy.size(); ++i)
    forward[i] = client_report(noisy, i, x, 3).grad;
  std::vector<Eigen::VectorXd> backward(noisy.size());
  for (int i = noisy.size() - 1; i >= 0; --i)
    backward[i] = client_report(noisy, i, x, 3).grad;
  for (int i = 0; i < noisy.size(); ++i)
    CHECK((forward[i] - backward[i]).norm() == 0.0);
}

TEST_CASE("global objective") {
  const Federation fed = generate_synthetic(paper_synth(25));
  const auto geom = DualGeometry::chi2(5, 0.7);
  RngStream rng(6, 0, 0, 0);
  const Eigen::VectorXd x = random_vector(rng, 10, 1.0);

  SUBCASE("uniform weights give the average loss") {
    double avg = 0.0;
    for (const auto& c : fed.clients) avg += local_loss(c, x) / fed.size();
    CHECK(global_objective(fed, geom, x, geom.uniform_weights()) ==
          doctest::Approx(avg).epsilon(1e-14));
  }

  SUBCASE("singleton federation") {
    Federation one;
    one.dimension = 10;
    one.clients.push_back(fed.clients[0]);
    const auto g1 = DualGeometry::chi2(1, 0.7);
    Eigen::VectorXd lam(1);
    lam << 1.0;
    CHECK(global_objective(one, g1, x, lam) ==
          doctest::Approx(local_loss(fed.clients[0], x)).epsilon(1e-14));
  }

  SUBCASE("matches extended-precision re-summation") {
    for (int t = 0; t < 50; ++t) {
      const Eigen::VectorXd xt = random_vector(rng, 10, 2.0);
      const Eigen::VectorXd lam = testutil::random_simplex_point(rng, 5);
      long double acc = 0.0L;
      for (int i = 0; i < fed.size(); ++i)
        acc += static_cast<long double>(lam[i]) *
               static_cast<long double>(local_loss(fed.clients[i], xt));
      acc -= static_cast<long double>(psi_value(geom, lam));
      const double got = global_objective(fed, geom, xt, lam);
      CHECK(std::abs(got - static_cast<double>(acc)) <=
            1e-12 * std::max(1.0, std::abs(got)));
    }
  }

  SUBCASE("rejects infeasible weights") {
    Eigen::VectorXd bad(5);
    bad << 1.0, 1.0, -1.0, 0.0, 0.0;
    CHECK_THROWS_AS(global_objective(fed, geom, x, bad), ConfigError);
  }
}

TEST_CASE("federation JSON round trip") {
  SynthConfig cfg = paper_synth(31);
  cfg.m_per_client = 7;  // keep the document small
  const Federation fed = generate_synthetic(cfg);
  const Federation back = federation_from_json(federation_to_json(fed));
  REQUIRE(back.size() == fed.size());
  CHECK(back.dimension == fed.dimension);
  CHECK(back.seed == fed.seed);
  for (int i = 0; i < fed.size(); ++i) {
    CHECK((back.clients[i].features() - fed.clients[i].features()).norm() ==
          0.0);
    CHECK((back.clients[i].targets() - fed.clients[i].targets()).norm() ==
          0.0);
    CHECK(back.clients[i].ridge() == fed.clients[i].ridge());
    CHECK(back.clients[i].client_id() == fed.clients[i].client_id());
  }
  CHECK_THROWS_AS(federation_from_json("{not json"), ConfigError);
}
