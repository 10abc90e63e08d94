#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace scaffpd {

struct RoundSnapshot {
  int round = 0;
  double tau = 0.0;
  double sigma = 0.0;
  double theta = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd dual_grad;  // exact per-client losses at this round's x
  Eigen::VectorXd s;          // extrapolated dual gradient
  std::map<std::string, double> metrics;
};

struct Trace {
  std::vector<RoundSnapshot> rounds;
  std::map<std::string, std::string> header;  // config and estimated constants
  Eigen::VectorXd final_x;
  Eigen::VectorXd final_lambda;
};

// CSV layout: '#'-prefixed header comments (one "# key = value" per entry,
// sorted), then the column header, then one row per round. LF line endings,
// shortest round-trip decimals.
std::string trace_to_csv(const Trace& trace);
void write_trace_csv(const Trace& trace, const std::string& path);

// Reads back the metric rows of an emitted trace (comments skipped).
// Column order must match trace_to_csv's.
std::vector<std::map<std::string, double>> read_trace_csv(
    const std::string& path);

extern const std::vector<std::string> kTraceColumns;

}  // namespace scaffpd
