#include "scaffpd/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "scaffpd/errors.hpp"
#include "scaffpd/metrics.hpp"
#include "scaffpd/trace.hpp"

namespace scaffpd {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object())
    throw ConfigError(where + " must be a JSON object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

template <typename T>
T get_field_or(const json& j, const char* key, const std::string& where,
               T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

SynthConfig parse_synth(const json& j) {
  require_object(j, "synth");
  reject_unknown(j, "synth",
                 {"n_clients", "dim", "m_per_client", "concept_shift_sigma",
                  "base_scale", "ridge", "seed"});
  SynthConfig s;
  s.n_clients = get_field<int>(j, "n_clients", "synth");
  s.dim = get_field<int>(j, "dim", "synth");
  s.m_per_client = get_field<int>(j, "m_per_client", "synth");
  s.concept_shift_sigma =
      get_field_or<double>(j, "concept_shift_sigma", "synth", 0.1);
  s.base_scale = get_field_or<double>(j, "base_scale", "synth", 1.0);
  s.ridge = get_field_or<double>(j, "ridge", "synth", 0.1);
  s.seed = get_field_or<std::uint64_t>(j, "seed", "synth", 0);
  return s;
}

GeometryConfig parse_dual(const json& j) {
  require_object(j, "dual");
  reject_unknown(j, "dual", {"kind", "rho", "alpha", "q"});
  GeometryConfig g;
  const auto kind = get_field<std::string>(j, "kind", "dual");
  if (kind == "chi2") {
    g.kind = GeometryKind::kChi2;
    g.rho = get_field<double>(j, "rho", "dual");
  } else if (kind == "cvar") {
    g.kind = GeometryKind::kCvar;
    g.alpha = get_field<double>(j, "alpha", "dual");
  } else if (kind == "qfl") {
    g.kind = GeometryKind::kQfl;
    g.q = get_field<double>(j, "q", "dual");
  } else {
    throw ConfigError("unknown dual geometry kind '" + kind + "'");
  }
  return g;
}

ScheduleConfig parse_schedule(const json& j) {
  require_object(j, "schedule");
  ScheduleConfig s;
  const auto mode = get_field<std::string>(j, "mode", "schedule");
  if (mode == "scc") {
    reject_unknown(j, "schedule", {"mode", "gamma0", "delta", "c_alpha"});
    s.mode = ScheduleMode::kScc;
    s.gamma0 = get_field_or<double>(j, "gamma0", "schedule", 1.0);
    s.delta = get_field_or<double>(j, "delta", "schedule", 0.25);
    s.c_alpha = get_field_or<double>(j, "c_alpha", "schedule", 0.25);
  } else if (mode == "scsc") {
    reject_unknown(j, "schedule", {"mode", "epsilon", "c_omega", "c_zeta"});
    s.mode = ScheduleMode::kScsc;
    s.epsilon = get_field_or<double>(j, "epsilon", "schedule", 1e-8);
    s.c_omega = get_field_or<double>(j, "c_omega", "schedule", 1.0);
    s.c_zeta = get_field_or<double>(j, "c_zeta", "schedule", 4.0);
  } else if (mode == "manual") {
    reject_unknown(j, "schedule", {"mode", "tau", "sigma", "theta"});
    s.mode = ScheduleMode::kManual;
    s.tau = get_field<double>(j, "tau", "schedule");
    s.sigma = get_field<double>(j, "sigma", "schedule");
    s.theta = get_field<double>(j, "theta", "schedule");
  } else {
    throw ConfigError("unknown schedule mode '" + mode + "'");
  }
  return s;
}

NoiseModel parse_noise(const json& j) {
  require_object(j, "noise");
  const auto kind = get_field<std::string>(j, "kind", "noise");
  if (kind == "deterministic") {
    reject_unknown(j, "noise", {"kind"});
    return NoiseModel::deterministic();
  }
  if (kind == "additive_gaussian") {
    reject_unknown(j, "noise", {"kind", "zeta"});
    const double zeta = get_field<double>(j, "zeta", "noise");
    if (!(zeta >= 0.0)) throw ConfigError("noise level must be >= 0");
    return NoiseModel::additive_gaussian(zeta);
  }
  if (kind == "minibatch") {
    reject_unknown(j, "noise", {"kind", "batch_size"});
    return NoiseModel::minibatch(get_field<int>(j, "batch_size", "noise"));
  }
  throw ConfigError("unknown noise kind '" + kind + "'");
}

AlgorithmKind parse_algorithm(const std::string& name) {
  if (name == "scaffpd") return AlgorithmKind::kScaffpd;
  if (name == "fedavg") return AlgorithmKind::kFedAvg;
  if (name == "scaffold") return AlgorithmKind::kScaffold;
  if (name == "pd_fedavg") return AlgorithmKind::kPdFedAvg;
  throw ConfigError("unknown algorithm '" + name + "'");
}

std::string algorithm_name(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kScaffpd: return "scaffpd";
    case AlgorithmKind::kFedAvg: return "fedavg";
    case AlgorithmKind::kScaffold: return "scaffold";
    case AlgorithmKind::kPdFedAvg: return "pd_fedavg";
  }
  return "?";
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

DualGeometry build_geometry(const GeometryConfig& config, int n) {
  switch (config.kind) {
    case GeometryKind::kChi2: return DualGeometry::chi2(n, config.rho);
    case GeometryKind::kCvar: return DualGeometry::cvar(n, config.alpha);
    case GeometryKind::kQfl: return DualGeometry::qfl(n, config.q);
  }
  throw ConfigError("unknown geometry kind");
}

ScheduleState build_schedule(const ExperimentConfig& config,
                             const ProblemConstants& constants) {
  const double tau_cap = config.eta_global * config.eta_global /
                         (40.0 * constants.l_xx);
  switch (config.schedule.mode) {
    case ScheduleMode::kScc:
      return scc_schedule_init(constants, config.schedule.gamma0,
                               config.schedule.delta, config.schedule.c_alpha,
                               tau_cap);
    case ScheduleMode::kScsc:
      return scsc_schedule(constants, config.schedule.epsilon,
                           config.schedule.c_omega, config.schedule.c_zeta,
                           tau_cap);
    case ScheduleMode::kManual: {
      // grid-searched overrides bypass the safety cap but not the drift
      // feasibility checks, which the solver applies every round
      ScheduleState state = manual_schedule(
          config.schedule.tau, config.schedule.sigma, config.schedule.theta);
      state.constants = constants;
      return state;
    }
  }
  throw ConfigError("unknown schedule mode");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require_object(doc, "config");
  reject_unknown(doc, "config",
                 {"synth", "dual", "algorithm", "schedule", "noise", "local",
                  "rounds", "metrics_stride", "parallel_clients",
                  "oracle_tol", "output", "summary", "label"});

  ExperimentConfig c;
  c.synth = parse_synth(doc.at("synth"));
  c.dual = parse_dual(doc.at("dual"));
  c.algorithm =
      parse_algorithm(get_field<std::string>(doc, "algorithm", "config"));
  if (doc.contains("schedule")) c.schedule = parse_schedule(doc.at("schedule"));
  c.noise = doc.contains("noise") ? parse_noise(doc.at("noise"))
                                  : NoiseModel::deterministic();

  const json local = doc.contains("local") ? doc.at("local") : json::object();
  require_object(local, "local");
  reject_unknown(local, "local",
                 {"steps", "eta_global", "eta_local", "dual_step"});
  c.local_steps = get_field_or<int>(local, "steps", "local", 1);
  c.eta_global = get_field_or<double>(local, "eta_global", "local", 1.0);
  c.eta_local = get_field_or<double>(local, "eta_local", "local", 0.0);
  c.dual_step = get_field_or<double>(local, "dual_step", "local", 0.0);

  c.rounds = get_field<int>(doc, "rounds", "config");
  c.metrics_stride = get_field_or<int>(doc, "metrics_stride", "config", 1);
  c.parallel_clients =
      get_field_or<bool>(doc, "parallel_clients", "config", false);
  c.oracle_tol = get_field_or<double>(doc, "oracle_tol", "config", 1e-12);
  c.output_path = get_field_or<std::string>(doc, "output", "config",
                                            std::string("trace.csv"));
  c.summary_path = get_field_or<std::string>(doc, "summary", "config",
                                             std::string());
  c.label = get_field_or<std::string>(doc, "label", "config", std::string());
  if (c.summary_path.empty()) {
    std::string p = c.output_path;
    const auto dot = p.rfind('.');
    if (dot != std::string::npos) p.resize(dot);
    c.summary_path = p + ".json";
  }

  // cross-field validation, before anything expensive runs
  if (c.rounds < 1) throw ConfigError("rounds must be >= 1");
  if (c.local_steps < 1) throw ConfigError("local.steps must be >= 1");
  if (!(c.eta_global >= 1.0))
    throw ConfigError("local.eta_global must be >= 1");
  if (c.metrics_stride < 1) throw ConfigError("metrics_stride must be >= 1");
  if (!(c.oracle_tol > 0.0)) throw ConfigError("oracle_tol must be > 0");
  if (c.dual.kind == GeometryKind::kQfl)
    throw ConfigError(
        "qfl geometry is value-only and cannot drive an experiment");
  const DualGeometry geom = build_geometry(c.dual, c.synth.n_clients);
  if (c.schedule.mode == ScheduleMode::kScsc && geom.mu_lambda() <= 0.0)
    throw ConfigError(
        "scsc schedule needs a strongly concave dual (chi2 with rho > 0)");
  const bool baseline = c.algorithm != AlgorithmKind::kScaffpd;
  if (baseline && !(c.eta_local > 0.0))
    throw ConfigError("baselines need local.eta_local > 0");
  if (c.algorithm == AlgorithmKind::kPdFedAvg && !(c.dual_step > 0.0))
    throw ConfigError("pd_fedavg needs local.dual_step > 0");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string RunSummary::to_json() const {
  json doc;
  doc["final_dist_sq"] = final_dist_sq;
  doc["initial_dist_sq"] = initial_dist_sq;
  doc["log_slope"] = log_slope;
  doc["rounds_to_tol"] = rounds_to_tol;
  doc["wall_time_s"] = wall_time_s;
  doc["oracle_residual"] = oracle_residual;
  doc["label"] = label;
  return doc.dump(2) + "\n";
}

RunSummary run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();

  Federation fed = generate_synthetic(config.synth);
  fed.noise = config.noise;
  const DualGeometry geom = build_geometry(config.dual, fed.size());

  // ground truth from the deterministic problem, independent of the solver
  Federation det = fed;
  det.noise = NoiseModel::deterministic();
  const SaddlePoint saddle = solve_saddle_oracle(det, geom, config.oracle_tol);
  if (!saddle.converged)
    throw OracleError("ground-truth saddle solve did not reach tolerance " +
                      format_double(config.oracle_tol) + " (best residual " +
                      format_double(saddle.kkt_residual) + ")");

  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(fed.dimension);
  const Eigen::VectorXd lambda0 = geom.uniform_weights();

  ConstantEstimates est = estimate_constants(fed, geom, x0);
  ProblemConstants constants;
  constants.mu_x = est.mu_x;
  constants.mu_lambda = est.mu_lambda;
  constants.l_xx = est.l_xx;
  constants.l_lambda_x = est.l_lambda_x;
  constants.zeta = config.noise.kind == NoiseKind::kAdditiveGaussian
                       ? config.noise.zeta
                       : 0.0;

  RunOptions options;
  options.metrics_stride = config.metrics_stride;
  options.parallel_clients = config.parallel_clients;
  const Eigen::VectorXd x_star = saddle.x_star;
  options.hooks.push_back([&x_star, &det](const Federation&,
                                          const DualGeometry& g,
                                          RoundSnapshot& snap) {
    snap.metrics["dist_sq_to_opt"] = (snap.x - x_star).squaredNorm();
    snap.metrics["kkt_residual"] = kkt_residual(det, g, snap.x, snap.lambda);
  });

  Trace trace;
  if (config.algorithm == AlgorithmKind::kScaffpd) {
    const ScheduleState schedule = build_schedule(config, constants);
    trace = run_scaffpd(fed, geom, config.local_steps, config.eta_global,
                        schedule, x0, lambda0, config.rounds, options);
  } else {
    BaselineConfig bc;
    bc.eta_local = config.eta_local;
    bc.steps = config.local_steps;
    bc.eta_global = config.eta_global;
    bc.dual_step = config.dual_step;
    switch (config.algorithm) {
      case AlgorithmKind::kFedAvg:
        bc.kind = BaselineKind::kFedAvg;
        trace = run_fedavg(fed, bc, x0, config.rounds, options);
        break;
      case AlgorithmKind::kScaffold:
        bc.kind = BaselineKind::kScaffold;
        trace = run_scaffold(fed, bc, x0, config.rounds, options);
        break;
      case AlgorithmKind::kPdFedAvg:
        bc.kind = BaselineKind::kPdFedAvg;
        trace = run_pd_fedavg(fed, geom, bc, x0, lambda0, config.rounds,
                              options);
        break;
      default:
        throw ConfigError("unhandled algorithm");
    }
    // baseline loops have no metric hooks wired internally; fill here
    for (auto& snap : trace.rounds) {
      if (snap.round % config.metrics_stride != 0 &&
          snap.round + 1 != config.rounds)
        continue;
      snap.metrics["dist_sq_to_opt"] = (snap.x - x_star).squaredNorm();
      snap.metrics["kkt_residual"] =
          kkt_residual(det, geom, snap.x, snap.lambda);
    }
  }

  trace.header["algorithm"] = algorithm_name(config.algorithm);
  trace.header["label"] = config.label;
  trace.header["rounds"] = std::to_string(config.rounds);
  trace.header["local_steps"] = std::to_string(config.local_steps);
  trace.header["eta_global"] = format_double(config.eta_global);
  trace.header["synth.n_clients"] = std::to_string(config.synth.n_clients);
  trace.header["synth.dim"] = std::to_string(config.synth.dim);
  trace.header["synth.m_per_client"] =
      std::to_string(config.synth.m_per_client);
  trace.header["synth.concept_shift_sigma"] =
      format_double(config.synth.concept_shift_sigma);
  trace.header["synth.base_scale"] = format_double(config.synth.base_scale);
  trace.header["synth.ridge"] = format_double(config.synth.ridge);
  trace.header["synth.seed"] = std::to_string(config.synth.seed);
  trace.header["dual.kind"] = config.dual.kind == GeometryKind::kChi2
                                  ? "chi2"
                                  : (config.dual.kind == GeometryKind::kCvar
                                         ? "cvar"
                                         : "qfl");
  trace.header["dual.rho"] = format_double(config.dual.rho);
  trace.header["dual.alpha"] = format_double(config.dual.alpha);
  trace.header["estimated.mu_x"] = format_double(constants.mu_x);
  trace.header["estimated.mu_lambda"] = format_double(constants.mu_lambda);
  trace.header["estimated.L_xx"] = format_double(constants.l_xx);
  trace.header["estimated.L_lambda_x"] =
      format_double(constants.l_lambda_x);
  trace.header["estimated.zeta"] = format_double(constants.zeta);
  trace.header["oracle.residual"] = format_double(saddle.kkt_residual);
  write_trace_csv(trace, config.output_path);

  RunSummary summary;
  summary.label = config.label;
  summary.oracle_residual = saddle.kkt_residual;
  summary.initial_dist_sq = (x0 - x_star).squaredNorm();
  summary.final_dist_sq = (trace.final_x - x_star).squaredNorm();

  std::vector<double> dist(config.rounds,
                           std::numeric_limits<double>::quiet_NaN());
  for (const auto& snap : trace.rounds) {
    const auto it = snap.metrics.find("dist_sq_to_opt");
    if (it != snap.metrics.end()) dist[snap.round] = it->second;
  }
  summary.rounds_to_tol = -1;
  for (int r = 0; r < config.rounds; ++r) {
    if (dist[r] == dist[r] && dist[r] <= 1e-6) {
      summary.rounds_to_tol = r;
      break;
    }
  }
  if (summary.rounds_to_tol < 0 && summary.final_dist_sq <= 1e-6)
    summary.rounds_to_tol = config.rounds;
  try {
    summary.log_slope = loglog_slope(dist, config.rounds / 2, config.rounds);
  } catch (const ConfigError&) {
    summary.log_slope = std::numeric_limits<double>::quiet_NaN();
  }
  summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  std::ofstream sf(config.summary_path, std::ios::binary);
  if (!sf) throw ConfigError("cannot open summary output: " +
                             config.summary_path);
  sf << summary.to_json();
  return summary;
}

std::vector<RunSummary> run_sweep(const std::string& json_text,
                                  const std::string& output_path) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep config is not valid JSON: ") +
                      e.what());
  }
  require_object(doc, "sweep config");
  reject_unknown(doc, "sweep config", {"base", "variants"});
  if (!doc.contains("base") || !doc.contains("variants"))
    throw ConfigError("sweep config needs 'base' and 'variants'");
  const json& variants = doc.at("variants");
  if (!variants.is_array() || variants.empty())
    throw ConfigError("'variants' must be a non-empty array");

  std::ofstream table(output_path, std::ios::binary);
  if (!table) throw ConfigError("cannot open sweep output: " + output_path);
  table << "key,label,status,final_dist_sq,initial_dist_sq,log_slope,"
           "rounds_to_tol,wall_time_s\n";

  std::vector<RunSummary> summaries;
  std::exception_ptr first_error;
  int index = 0;
  for (const auto& variant : variants) {
    json merged = doc.at("base");
    merged.merge_patch(variant);
    if (!variant.contains("output")) {
      std::string stem = output_path;
      const auto dot = stem.rfind('.');
      if (dot != std::string::npos) stem.resize(dot);
      merged["output"] = stem + "_" + std::to_string(index) + ".csv";
    }
    const std::string key = [&] {
      std::ostringstream h;
      h << std::hex << std::hash<std::string>{}(merged.dump());
      return h.str();
    }();
    std::string label = merged.value("label", std::string());
    try {
      const ExperimentConfig cfg = parse_experiment_config(merged.dump());
      RunSummary s = run_experiment(cfg);
      table << key << "," << s.label << ",ok," << format_double(s.final_dist_sq)
            << "," << format_double(s.initial_dist_sq) << ","
            << format_double(s.log_slope) << "," << s.rounds_to_tol << ","
            << format_double(s.wall_time_s) << "\n";
      table.flush();
      summaries.push_back(std::move(s));
    } catch (...) {
      table << key << "," << label << ",error,,,,,\n";
      table.flush();
      if (!first_error) first_error = std::current_exception();
    }
    ++index;
  }
  if (first_error) std::rethrow_exception(first_error);
  return summaries;
}

}  // namespace scaffpd
