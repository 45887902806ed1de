#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cpbo {

// Tuning parameter: price threshold [EUR/kWh] and daytime lower setpoint [°C].
struct ParamPoint {
  double price_threshold = 0.0;
  double lower_setpoint = 0.0;

  bool operator==(const ParamPoint&) const = default;
};

// Daily context: mean outdoor temperature [°C].
struct Context {
  double mean_outdoor_temp = 0.0;

  bool operator==(const Context&) const = default;
};

struct EvalPoint {
  ParamPoint theta;
  Context context;

  bool operator==(const EvalPoint&) const = default;
};

// Parameter set Θ and context set Z.
struct Domain {
  double price_threshold_min = 0.0889;
  double price_threshold_max = 0.1019;
  double setpoint_min = 20.0;
  double setpoint_max = 26.0;
  double context_min = -10.0;
  double context_max = 10.0;

  void validate() const;
  bool contains(const ParamPoint& p, double tol = 1e-12) const;
  Context clamp(Context z) const;
};

struct KernelConfig {
  // Per-dimension lengthscales on unit-cube coordinates, ordered
  // (price threshold, setpoint, context). The context entry is unused when
  // `contextual` is false.
  std::vector<double> lengthscales{0.2, 0.2, 0.2};
  double jitter = 1e-6;
  bool contextual = true;

  int dimension() const { return contextual ? 3 : 2; }
  void validate() const;
};

// Maps (θ, z) to the unit cube. The context is clamped to Z first; the
// returned vector has 3 entries, or 2 when `contextual` is false.
Eigen::VectorXd normalize_point(const EvalPoint& p, const Domain& domain,
                                bool contextual = true);

// Squared-exponential kernel exp(-sum_d (x_d - y_d)^2 / (2 l_d^2)).
double kernel_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const KernelConfig& cfg);

// K_ij = k(x_i, x_j) + jitter * [i == j].
Eigen::MatrixXd gram_matrix(const std::vector<Eigen::VectorXd>& points,
                            const KernelConfig& cfg);

// Kernel values between one point and a list of points (no jitter).
Eigen::VectorXd kernel_column(const Eigen::VectorXd& x,
                              const std::vector<Eigen::VectorXd>& points,
                              const KernelConfig& cfg);

}  // namespace cpbo
