#pragma once

#include <Eigen/Dense>
#include <vector>

namespace scaffpd {

struct ProblemConstants {
  double mu_x = 0.0;
  double mu_lambda = 0.0;
  double l_xx = 0.0;
  double l_lambda_x = 0.0;
  double zeta = 0.0;
};

enum class ScheduleMode { kScc, kScsc, kManual };

// Per-round primal/dual step state. The scc mode follows the accelerated
// recursion gamma' = gamma*(1 + mu_x*tau), tau' = tau*sqrt(gamma/gamma'),
// sigma' = gamma'*tau', theta' = sigma/sigma'. scsc and manual are constant.
struct ScheduleState {
  ScheduleMode mode = ScheduleMode::kManual;
  double tau = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
  int round = 0;
  ProblemConstants constants;
};

// tau0 is the positive root of
//   (2*L_lx^2*gamma0/c_alpha)*t^2 + 12*L_xx*t - (1-delta) = 0,
// then clamped to tau_cap; sigma0 = gamma0*tau0, theta0 = 1.
ScheduleState scc_schedule_init(const ProblemConstants& constants,
                                double gamma0, double delta, double c_alpha,
                                double tau_cap);

ScheduleState scc_schedule_step(const ScheduleState& state);

// Constant schedule for a strongly concave dual:
//   omega = max(C_omega*(1/2 + 24*L_xx/mu_x
//                        + sqrt((1/2 + 24*L_xx/mu_x)^2
//                               + 16*L_lx^2/(mu_x*mu_lambda))),
//               C_zeta*zeta^2/(mu_x*epsilon)),
//   theta = 1 - 1/omega, tau = (4/mu_x)*(1-theta)/theta,
//   sigma = (1/mu_lambda)*(1-theta)/theta.
// omega is raised, if needed, so tau <= tau_cap.
ScheduleState scsc_schedule(const ProblemConstants& constants, double epsilon,
                            double c_omega, double c_zeta, double tau_cap);

ScheduleState manual_schedule(double tau, double sigma, double theta);

// s = (1+theta)*cur - theta*prev
Eigen::VectorXd extrapolate_dual_gradient(const Eigen::VectorXd& cur,
                                          const Eigen::VectorXd& prev,
                                          double theta);

// x_new = x - tau * sum_i lambda_i * delta_i
Eigen::VectorXd primal_aggregate(const Eigen::VectorXd& x,
                                 const std::vector<Eigen::VectorXd>& deltas,
                                 const Eigen::VectorXd& lambda, double tau);

}  // namespace scaffpd
