#include "scaffpd/trace.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "scaffpd/errors.hpp"

namespace scaffpd {

const std::vector<std::string> kTraceColumns = {
    "round",       "tau",          "sigma",      "theta",
    "dist_sq_to_opt", "kkt_residual", "avg_loss", "worst20_loss",
    "lambda_max",  "lambda_min",   "psi_value"};

namespace {

// shortest round-trip decimal
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double snapshot_field(const RoundSnapshot& snap, const std::string& name) {
  if (name == "round") return static_cast<double>(snap.round);
  if (name == "tau") return snap.tau;
  if (name == "sigma") return snap.sigma;
  if (name == "theta") return snap.theta;
  const auto it = snap.metrics.find(name);
  if (it != snap.metrics.end()) return it->second;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
  std::ostringstream out;
  for (const auto& [key, value] : trace.header)
    out << "# " << key << " = " << value << "\n";
  for (size_t c = 0; c < kTraceColumns.size(); ++c) {
    if (c) out << ",";
    out << kTraceColumns[c];
  }
  out << "\n";
  for (const auto& snap : trace.rounds) {
    for (size_t c = 0; c < kTraceColumns.size(); ++c) {
      if (c) out << ",";
      if (kTraceColumns[c] == "round")
        out << snap.round;
      else
        out << format_double(snapshot_field(snap, kTraceColumns[c]));
    }
    out << "\n";
  }
  return out.str();
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // binary keeps LF on any platform
  if (!f) throw ConfigError("cannot open trace output: " + path);
  f << trace_to_csv(trace);
  if (!f) throw ConfigError("failed writing trace output: " + path);
}

std::vector<std::map<std::string, double>> read_trace_csv(
    const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open trace file: " + path);
  std::string line;
  std::vector<std::string> columns;
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (columns.empty()) {
      columns = cells;
      continue;
    }
    if (cells.size() != columns.size())
      throw ConfigError("trace row has wrong cell count: " + path);
    std::map<std::string, double> row;
    for (size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto res =
          std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (res.ec != std::errc())
        throw ConfigError("bad numeric cell in trace: " + cells[c]);
      row[columns[c]] = v;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace scaffpd
