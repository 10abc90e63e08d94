#include "scaffpd/dual_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scaffpd/errors.hpp"

namespace scaffpd {

DualGeometry DualGeometry::chi2(int n, double rho) {
  if (n < 1) throw ConfigError("dual geometry needs at least one client");
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw ConfigError("chi2 penalty weight must be finite and >= 0");
  DualGeometry g(GeometryKind::kChi2, n);
  g.rho_ = rho;
  return g;
}

DualGeometry DualGeometry::cvar(int n, double alpha) {
  if (n < 1) throw ConfigError("dual geometry needs at least one client");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("cvar level must lie in (0, 1]");
  if (alpha * n < 1.0)
    throw ConfigError("cvar cap infeasible: alpha * N must be >= 1");
  DualGeometry g(GeometryKind::kCvar, n);
  g.alpha_ = alpha;
  return g;
}

DualGeometry DualGeometry::qfl(int n, double q) {
  if (n < 1) throw ConfigError("dual geometry needs at least one client");
  if (!(q > 0.0)) throw ConfigError("qfl exponent must be > 0");
  DualGeometry g(GeometryKind::kQfl, n);
  g.q_ = q;
  return g;
}

double DualGeometry::mu_lambda() const {
  return kind_ == GeometryKind::kChi2 ? rho_ * n_ : 0.0;
}

double DualGeometry::cap() const {
  if (kind_ != GeometryKind::kCvar)
    throw ConfigError("per-coordinate cap only defined for cvar");
  return 1.0 / (alpha_ * n_);
}

bool DualGeometry::is_feasible(const Eigen::VectorXd& lambda,
                               double tol) const {
  if (lambda.size() != n_) return false;
  if (!lambda.allFinite()) return false;
  if (kind_ == GeometryKind::kQfl) return true;
  if (lambda.minCoeff() < -tol) return false;
  if (std::abs(lambda.sum() - 1.0) > tol) return false;
  if (kind_ == GeometryKind::kCvar && lambda.maxCoeff() > cap() + tol)
    return false;
  return true;
}

void DualGeometry::require_feasible(const Eigen::VectorXd& lambda,
                                    double tol) const {
  if (!is_feasible(lambda, tol))
    throw ConfigError("client weight vector is not feasible");
}

Eigen::VectorXd DualGeometry::uniform_weights() const {
  return Eigen::VectorXd::Constant(n_, 1.0 / n_);
}

double psi_value(const DualGeometry& geom, const Eigen::VectorXd& lambda) {
  geom.require_feasible(lambda);
  switch (geom.kind()) {
    case GeometryKind::kChi2: {
      const double n = geom.n();
      double acc = 0.0;
      for (int i = 0; i < geom.n(); ++i) {
        const double d = n * lambda[i] - 1.0;
        acc += d * d;
      }
      return geom.rho() / (2.0 * n) * acc;
    }
    case GeometryKind::kCvar:
      return 0.0;
    case GeometryKind::kQfl:
      return std::pow(lambda.norm(), 1.0 + 1.0 / geom.q());
  }
  throw ConfigError("unknown geometry kind");
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw ConfigError("projection input must be finite");
  const int n = static_cast<int>(v.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;
  });
  double running = 0.0;
  double theta = 0.0;
  int support = 0;
  for (int k = 0; k < n; ++k) {
    running += v[order[k]];
    const double candidate = (running - 1.0) / (k + 1);
    if (v[order[k]] - candidate > 0.0) {
      theta = candidate;
      support = k + 1;
    }
  }
  (void)support;
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

namespace {

// sum_i clamp(v_i - t, 0, cap), strictly decreasing in t where positive
double capped_mass(const Eigen::VectorXd& v, double cap, double t) {
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i)
    s += std::clamp(v[i] - t, 0.0, cap);
  return s;
}

}  // namespace

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double cap) {
  if (!v.allFinite()) throw ConfigError("projection input must be finite");
  const int n = static_cast<int>(v.size());
  if (!(cap > 0.0) || n * cap < 1.0)
    throw ConfigError("capped simplex infeasible: N * cap must be >= 1");

  double lo = v.minCoeff() - cap;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    if (capped_mass(v, cap, mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  // Recover the active sets at the bisected threshold, then solve the shift
  // exactly on the free set so the output is not limited by bisection error.
  const double t0 = 0.5 * (lo + hi);
  double capped_sum = 0.0;
  int free_count = 0;
  double free_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = v[i] - t0;
    if (z >= cap) {
      capped_sum += cap;
    } else if (z > 0.0) {
      ++free_count;
      free_sum += v[i];
    }
  }
  double t = t0;
  if (free_count > 0) t = (free_sum + capped_sum - 1.0) / free_count;
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = std::clamp(v[i] - t, 0.0, cap);
  return out;
}

Eigen::VectorXd dual_prox(const DualGeometry& geom,
                          const Eigen::VectorXd& lambda_prev,
                          const Eigen::VectorXd& s, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("dual step must be > 0");
  geom.require_feasible(lambda_prev);
  if (s.size() != geom.n())
    throw ConfigError("dual gradient dimension mismatch");
  switch (geom.kind()) {
    case GeometryKind::kChi2: {
      // with no penalty the prox is a plain projected ascent step; special
      // cased so it matches project_simplex(lambda_prev + sigma*s) bit-exactly
      if (geom.rho() == 0.0)
        return project_simplex(lambda_prev + sigma * s);
      // complete the square: the objective is a scaled distance to w
      const Eigen::VectorXd w =
          (s + lambda_prev / sigma +
           Eigen::VectorXd::Constant(geom.n(), geom.rho())) /
          (geom.rho() * geom.n() + 1.0 / sigma);
      return project_simplex(w);
    }
    case GeometryKind::kCvar:
      return project_capped_simplex(lambda_prev + sigma * s, geom.cap());
    case GeometryKind::kQfl:
      throw ConfigError("qfl geometry is value-only: no dual prox");
  }
  throw ConfigError("unknown geometry kind");
}

double chi_coefficient(const DualGeometry& geom) {
  switch (geom.kind()) {
    case GeometryKind::kChi2:
      return 1.0;
    case GeometryKind::kCvar: {
      const double u = geom.cap();
      const int k = static_cast<int>(std::floor(1.0 / u + 1e-12));
      const double r = 1.0 - k * u;
      return k * u * u + r * r;
    }
    case GeometryKind::kQfl:
      throw ConfigError("chi coefficient undefined: unbounded weight set");
  }
  throw ConfigError("unknown geometry kind");
}

}  // namespace scaffpd
