#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "scaffpd/dual_geometry.hpp"
#include "scaffpd/federation.hpp"
#include "scaffpd/local_solver.hpp"
#include "scaffpd/schedule.hpp"
#include "scaffpd/trace.hpp"

namespace scaffpd {

// Fills snapshot.metrics after each round (distance to optimum, residuals,
// loss statistics); installed by the experiment harness.
using MetricHook = std::function<void(const Federation&, const DualGeometry&,
                                      RoundSnapshot&)>;

struct RunOptions {
  std::vector<MetricHook> hooks;
  int metrics_stride = 1;     // evaluate hooks every k-th round (and the last)
  bool parallel_clients = false;
  double divergence_norm = 1e12;
};

// One communication round: collect client reports, extrapolate the dual
// gradient and take the dual prox step, refresh control variates, fan out
// corrected local updates, aggregate the weighted primal step, advance the
// schedule. eta_local is derived from the round's tau each round.
Trace run_scaffpd(const Federation& fed, const DualGeometry& geom,
                  int local_steps, double eta_global,
                  const ScheduleState& schedule, const Eigen::VectorXd& x0,
                  const Eigen::VectorXd& lambda0, int rounds,
                  const RunOptions& options = {});

}  // namespace scaffpd
