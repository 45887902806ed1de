#include "cpbo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpbo/errors.hpp"

namespace cpbo {

void Domain::validate() const {
  if (!(price_threshold_max > price_threshold_min))
    throw ConfigError("domain: price threshold range has zero width");
  if (!(setpoint_max > setpoint_min))
    throw ConfigError("domain: setpoint range has zero width");
  if (!(context_max > context_min))
    throw ConfigError("domain: context range has zero width");
}

bool Domain::contains(const ParamPoint& p, double tol) const {
  return p.price_threshold >= price_threshold_min - tol &&
         p.price_threshold <= price_threshold_max + tol &&
         p.lower_setpoint >= setpoint_min - tol &&
         p.lower_setpoint <= setpoint_max + tol;
}

Context Domain::clamp(Context z) const {
  z.mean_outdoor_temp =
      std::clamp(z.mean_outdoor_temp, context_min, context_max);
  return z;
}

void KernelConfig::validate() const {
  if (static_cast<int>(lengthscales.size()) < dimension())
    throw ConfigError("kernel: expected " + std::to_string(dimension()) +
                      " lengthscales, got " +
                      std::to_string(lengthscales.size()));
  for (int d = 0; d < dimension(); ++d)
    if (!(lengthscales[d] > 0.0))
      throw ConfigError("kernel: lengthscales must be positive");
  if (!(jitter >= 0.0)) throw ConfigError("kernel: jitter must be >= 0");
}

Eigen::VectorXd normalize_point(const EvalPoint& p, const Domain& domain,
                                bool contextual) {
  domain.validate();
  const Context z = domain.clamp(p.context);
  Eigen::VectorXd x(contextual ? 3 : 2);
  x[0] = (p.theta.price_threshold - domain.price_threshold_min) /
         (domain.price_threshold_max - domain.price_threshold_min);
  x[1] = (p.theta.lower_setpoint - domain.setpoint_min) /
         (domain.setpoint_max - domain.setpoint_min);
  if (contextual)
    x[2] = (z.mean_outdoor_temp - domain.context_min) /
           (domain.context_max - domain.context_min);
  return x;
}

double kernel_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const KernelConfig& cfg) {
  if (x.size() != y.size())
    throw DimensionError("kernel_eval: dimension mismatch");
  if (x.size() > static_cast<Eigen::Index>(cfg.lengthscales.size()))
    throw DimensionError("kernel_eval: more coordinates than lengthscales");
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double u = (x[d] - y[d]) / cfg.lengthscales[d];
    r2 += u * u;
  }
  return std::exp(-0.5 * r2);
}

Eigen::MatrixXd gram_matrix(const std::vector<Eigen::VectorXd>& points,
                            const KernelConfig& cfg) {
  if (points.empty()) throw DimensionError("gram_matrix: empty point list");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0 + cfg.jitter;
    for (Eigen::Index j = 0; j < i; ++j) {
      K(i, j) = kernel_eval(points[i], points[j], cfg);
      K(j, i) = K(i, j);
    }
  }
  return K;
}

Eigen::VectorXd kernel_column(const Eigen::VectorXd& x,
                              const std::vector<Eigen::VectorXd>& points,
                              const KernelConfig& cfg) {
  Eigen::VectorXd k(static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j)
    k[static_cast<Eigen::Index>(j)] = kernel_eval(x, points[j], cfg);
  return k;
}

}  // namespace cpbo
