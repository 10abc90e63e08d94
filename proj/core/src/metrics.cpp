#include "scaffpd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "scaffpd/errors.hpp"

namespace scaffpd {

double worst_fraction(const std::vector<double>& values, double k,
                      bool higher_is_better) {
  if (values.empty()) throw ConfigError("worst-fraction of an empty list");
  if (!(k > 0.0 && k <= 1.0))
    throw ConfigError("fraction must lie in (0, 1]");
  std::vector<double> sorted = values;
  // worst first: lowest scores, or highest losses
  if (higher_is_better)
    std::sort(sorted.begin(), sorted.end());
  else
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const auto take = static_cast<size_t>(
      std::ceil(k * static_cast<double>(sorted.size())));
  double acc = 0.0;
  for (size_t i = 0; i < take; ++i) acc += sorted[i];
  return acc / static_cast<double>(take);
}

double top_eigenvalue(const Eigen::MatrixXd& sym, double tol) {
  const int n = static_cast<int>(sym.rows());
  if (n == 0 || sym.cols() != n) throw ConfigError("matrix must be square");
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double value = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd w = sym * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - value) <= tol * std::max(1.0, std::abs(next))) {
      return next;
    }
    value = next;
  }
  return value;
}

ConstantEstimates estimate_constants(const Federation& fed,
                                     const DualGeometry& geom,
                                     const Eigen::VectorXd& x0) {
  ConstantEstimates est;
  est.mu_lambda = geom.mu_lambda();
  est.mu_x = fed.clients.empty() ? 0.0 : fed.clients.front().ridge();
  double l_xx = 0.0;
  Eigen::MatrixXd grads(fed.size(), fed.dimension);
  for (int i = 0; i < fed.size(); ++i) {
    l_xx = std::max(l_xx, top_eigenvalue(fed.clients[i].hessian()));
    grads.row(i) =
        local_gradient_deterministic(fed.clients[i], x0).transpose();
  }
  est.l_xx = l_xx;
  // local smoothness of the coupling at the start point, with a 2x margin:
  // no global Lipschitz constant exists for quadratic losses over all of R^d
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(grads);
  est.l_lambda_x =
      2.0 * (svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0);
  return est;
}

double loglog_slope(const std::vector<double>& values, int first, int last) {
  if (first < 0) first = 0;
  if (last > static_cast<int>(values.size()))
    last = static_cast<int>(values.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (int r = first; r < last; ++r) {
    if (r < 1 || !(values[r] > 0.0)) continue;
    const double lx = std::log(static_cast<double>(r));
    const double ly = std::log(values[r]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw ConfigError("too few points for a slope fit");
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ConfigError("degenerate slope fit");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace scaffpd
