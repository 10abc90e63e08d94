#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "scaffpd/errors.hpp"
#include "scaffpd/metrics.hpp"
#include "scaffpd/oracle.hpp"
#include "scaffpd/solver.hpp"
#include "test_util.hpp"

using namespace scaffpd;
using testutil::paper_synth;

namespace {

ProblemConstants constants_for(const Federation& fed,
                               const DualGeometry& geom) {
  const ConstantEstimates est =
      estimate_constants(fed, geom, Eigen::VectorXd::Zero(fed.dimension));
  ProblemConstants c;
  c.mu_x = est.mu_x;
  c.mu_lambda = est.mu_lambda;
  c.l_xx = est.l_xx;
  c.l_lambda_x = est.l_lambda_x;
  return c;
}

}  // namespace

TEST_CASE("single local step matches a centralized primal-dual loop") {
  const Federation fed = generate_synthetic(paper_synth(51));
  const auto geom = DualGeometry::chi2(5, 0.05);
  const ScheduleState sched = manual_schedule(0.125, 0.5, 0.875);

  const int rounds = 50;
  const Trace trace =
      run_scaffpd(fed, geom, 1, 1.0, sched, Eigen::VectorXd::Zero(10),
                  geom.uniform_weights(), rounds);

  // independent reference: extrapolated dual prox + weighted gradient step
  Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
  Eigen::VectorXd lambda = geom.uniform_weights();
  Eigen::VectorXd prev(5), cur(5);
  for (int r = 0; r < rounds; ++r) {
    for (int i = 0; i < 5; ++i) cur[i] = local_loss(fed.clients[i], x);
    if (r == 0) prev = cur;
    const Eigen::VectorXd s = (1.0 + sched.theta) * cur - sched.theta * prev;
    lambda = dual_prox(geom, lambda, s, sched.sigma);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(10);
    for (int i = 0; i < 5; ++i)
      g += lambda[i] * local_gradient_deterministic(fed.clients[i], x);
    x -= sched.tau * g;
    prev = cur;
    CHECK((trace.rounds[r].lambda - lambda).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK((trace.final_x - x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("huge penalty keeps the weights uniform") {
  const Federation fed = generate_synthetic(paper_synth(52));
  const auto geom = DualGeometry::chi2(5, 1e9);
  const ScheduleState sched = manual_schedule(0.25, 1e-3, 0.9);
  const Trace trace =
      run_scaffpd(fed, geom, 5, 1.0, sched, Eigen::VectorXd::Zero(10),
                  geom.uniform_weights(), 100);
  for (const auto& snap : trace.rounds)
    CHECK((snap.lambda - geom.uniform_weights()).norm() <= 1e-6);
}

TEST_CASE("singleton federation reduces to corrected descent on one loss") {
  Federation fed = generate_synthetic(paper_synth(53));
  Federation one;
  one.dimension = fed.dimension;
  one.seed = fed.seed;
  one.clients.push_back(fed.clients[0]);
  const auto geom = DualGeometry::chi2(1, 0.1);
  const ScheduleState sched = manual_schedule(0.2, 0.5, 0.9);
  const Trace trace =
      run_scaffpd(one, geom, 10, 1.0, sched, Eigen::VectorXd::Zero(10),
                  geom.uniform_weights(), 300);
  for (const auto& snap : trace.rounds) CHECK(snap.lambda[0] == 1.0);
  const Eigen::VectorXd ridge_solution =
      one.clients[0].hessian().ldlt().solve(-one.clients[0].linear_term());
  CHECK((trace.final_x - ridge_solution).norm() <= 1e-8);
}

TEST_CASE("constant schedule contracts on the synthetic problem") {
  const Federation fed = generate_synthetic(paper_synth(54));
  for (double rho : {0.01, 0.05, 0.1}) {
    const auto geom = DualGeometry::chi2(5, rho);
    const SaddlePoint saddle = solve_saddle_oracle(fed, geom, 1e-12);
    REQUIRE(saddle.converged);
    const ProblemConstants c = constants_for(fed, geom);
    const ScheduleState sched = scsc_schedule(c, 1e-10, 1.0, 4.0, 0.0);
    const Trace trace =
        run_scaffpd(fed, geom, 1, 1.0, sched, Eigen::VectorXd::Zero(10),
                    geom.uniform_weights(), 400);
    std::vector<double> dist;
    for (const auto& snap : trace.rounds)
      dist.push_back((snap.x - saddle.x_star).squaredNorm());
    // geometric decrease after burn-in
    int violations = 0;
    for (size_t r = 21; r < dist.size(); ++r)
      if (dist[r] > dist[r - 1] * 0.9999 && dist[r] > 1e-20) ++violations;
    CHECK(violations == 0);
    CHECK(dist.back() < dist.front());
  }
}

TEST_CASE("traces are deterministic and order-independent") {
  Federation fed = generate_synthetic(paper_synth(55));
  fed.noise = NoiseModel::additive_gaussian(0.2);
  const auto geom = DualGeometry::chi2(5, 0.05);
  const ScheduleState sched = manual_schedule(0.125, 0.5, 0.875);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(10);

  RunOptions serial;
  RunOptions parallel;
  parallel.parallel_clients = true;

  const Trace a =
      run_scaffpd(fed, geom, 8, 1.0, sched, x0, geom.uniform_weights(), 60,
                  serial);
  const Trace b =
      run_scaffpd(fed, geom, 8, 1.0, sched, x0, geom.uniform_weights(), 60,
                  serial);
  const Trace c =
      run_scaffpd(fed, geom, 8, 1.0, sched, x0, geom.uniform_weights(), 60,
                  parallel);
  REQUIRE(a.rounds.size() == b.rounds.size());
  REQUIRE(a.rounds.size() == c.rounds.size());
  for (size_t r = 0; r < a.rounds.size(); ++r) {
    CHECK((a.rounds[r].x - b.rounds[r].x).norm() == 0.0);
    CHECK((a.rounds[r].x - c.rounds[r].x).norm() == 0.0);
    CHECK((a.rounds[r].lambda - c.rounds[r].lambda).norm() == 0.0);
  }
  CHECK((a.final_x - c.final_x).norm() == 0.0);
}

TEST_CASE("schedule identities hold along a growing-schedule run") {
  const Federation fed = generate_synthetic(paper_synth(56));
  const auto geom = DualGeometry::chi2(5, 0.0);
  const ProblemConstants c = constants_for(fed, geom);
  const ScheduleState sched = scc_schedule_init(c, 1.0, 0.25, 0.25, 0.0);
  const Trace trace =
      run_scaffpd(fed, geom, 1, 1.0, sched, Eigen::VectorXd::Zero(10),
                  geom.uniform_weights(), 200);
  const double product0 = sched.tau * sched.sigma;
  for (size_t r = 1; r < trace.rounds.size(); ++r) {
    const auto& snap = trace.rounds[r];
    CHECK(std::abs(snap.tau * snap.sigma - product0) <= 1e-10 * product0);
    CHECK(std::abs(snap.theta -
                   trace.rounds[r - 1].sigma / snap.sigma) <= 1e-12);
  }
}

TEST_CASE("solver configuration errors") {
  const Federation fed = generate_synthetic(paper_synth(57));
  const auto geom = DualGeometry::chi2(5, 0.0);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(10);

  SUBCASE("constant schedule with a merely concave dual") {
    ProblemConstants c = constants_for(fed, DualGeometry::chi2(5, 0.1));
    ScheduleState sched = scsc_schedule(c, 1e-8, 1.0, 4.0, 0.0);
    CHECK_THROWS_AS(run_scaffpd(fed, geom, 1, 1.0, sched, x0,
                                geom.uniform_weights(), 10),
                    ConfigError);
  }

  SUBCASE("client count mismatch") {
    const auto wrong = DualGeometry::chi2(4, 0.1);
    CHECK_THROWS_AS(run_scaffpd(fed, wrong, 1, 1.0,
                                manual_schedule(0.1, 0.1, 0.5), x0,
                                wrong.uniform_weights(), 10),
                    ConfigError);
  }

  SUBCASE("value-only geometry is rejected") {
    const auto qfl = DualGeometry::qfl(5, 2.0);
    CHECK_THROWS_AS(run_scaffpd(fed, qfl, 1, 1.0,
                                manual_schedule(0.1, 0.1, 0.5), x0,
                                Eigen::VectorXd::Constant(5, 0.2), 10),
                    ConfigError);
  }

  SUBCASE("unsafe manual step is rejected when constants are known") {
    ScheduleState sched = manual_schedule(10.0, 0.1, 0.5);
    sched.constants = constants_for(fed, geom);
    CHECK_THROWS_AS(run_scaffpd(fed, geom, 1, 1.0, sched, x0,
                                geom.uniform_weights(), 10),
                    ConfigError);
  }

  SUBCASE("divergence is signalled") {
    // a wildly unsafe manual step with no constants attached
    ScheduleState sched = manual_schedule(50.0, 0.1, 0.5);
    CHECK_THROWS_AS(run_scaffpd(fed, geom, 1, 1.0, sched, x0,
                                geom.uniform_weights(), 200),
                    DivergenceError);
  }
}
