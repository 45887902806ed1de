#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cpbo/acquisition.hpp"
#include "cpbo/kernels.hpp"
#include "cpbo/preference.hpp"

namespace cpbo {

// β_t = beta + growth · log(1 + t) for the logarithmic schedule, where t is
// the number of comparisons recorded so far.
struct BetaSchedule {
  enum class Kind { fixed, logarithmic };
  Kind kind = Kind::fixed;
  double growth = 0.0;
};

struct TunerConfig {
  Domain domain;
  KernelConfig kernel;
  double rkhs_bound = 5.0;
  double beta = 1.0;
  BetaSchedule beta_schedule;
  // Grid over Θ: `grid_price_steps` values of θ₁ and `grid_setpoint_steps`
  // values of θ₂, evenly spaced including both ends.
  int grid_price_steps = 14;
  int grid_setpoint_steps = 25;
  ParamPoint seed_theta{0.0954, 22.0};
  SolverOptions solver;

  double beta_at(std::size_t comparisons) const;
  void validate() const;
};

// Row-major over (θ₁, θ₂): index = i1 · grid_setpoint_steps + i2.
std::vector<ParamPoint> make_theta_grid(const TunerConfig& cfg);

struct TunerState {
  TunerConfig config;
  PreferenceDataset dataset;
  ConfidenceState cs;
  std::vector<ParamPoint> theta_grid;

  // Cached per-dataset quantities.
  std::vector<Eigen::VectorXd> coords;  // normalized dataset points
  Eigen::MatrixXd chol_lower;           // Cholesky factor of the Gram matrix
  Eigen::VectorXd mle_alpha;            // J_MLE = L α

  const EvalPoint& previous() const { return dataset.last(); }
  // Index of the next day to be proposed (the seed day is day 0).
  std::size_t next_day() const { return dataset.size(); }
};

// State holding only the seed day (θ_0, z_0).
TunerState make_tuner_state(const TunerConfig& cfg, Context z0);
// Rebuilds a state from a stored dataset (used on resume).
TunerState make_tuner_state(const TunerConfig& cfg, PreferenceDataset data);

AcquisitionProblem make_acquisition_problem(const TunerState& state);

AcquisitionResult acquisition_solve(const AcquisitionProblem& problem,
                                    const TunerState& state,
                                    const ParamPoint& theta, Context z,
                                    const SolverOptions& options,
                                    const AcquisitionResult* warm = nullptr);

// Optimal value of the optimistic-improvement program for candidate (θ, z).
double acquisition_value(const ParamPoint& theta, Context z,
                         const TunerState& state);

struct Proposal {
  ParamPoint theta;
  std::size_t grid_index = 0;
  double value = 0.0;
  int retries = 0;  // candidates that needed the loosened tolerance
};

Proposal propose_detailed(const TunerState& state, Context z);
ParamPoint propose(const TunerState& state, Context z);

TunerState update(const TunerState& state, const ParamPoint& theta, Context z,
                  int outcome);

// Predicted-utility argmax over the grid for each z (θ₁ profiled out by
// maximization); returns θ₂ per z. Needs at least 5 comparisons.
std::vector<double> predict_optimal_theta2(const TunerState& state,
                                           const std::vector<Context>& zs);

// Kernel interpolation of the MLE utilities at (θ, z): k(x)ᵀ K⁻¹ J_MLE.
double predicted_utility(const TunerState& state, const ParamPoint& theta,
                         Context z);

}  // namespace cpbo
