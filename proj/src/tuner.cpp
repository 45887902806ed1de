#include "cpbo/tuner.hpp"

#include <cmath>
#include <string>

#include "cpbo/errors.hpp"

namespace cpbo {

double TunerConfig::beta_at(std::size_t comparisons) const {
  if (beta_schedule.kind == BetaSchedule::Kind::logarithmic)
    return beta +
           beta_schedule.growth * std::log1p(static_cast<double>(comparisons));
  return beta;
}

void TunerConfig::validate() const {
  domain.validate();
  kernel.validate();
  if (!(rkhs_bound > 0.0)) throw ConfigError("tuner: B must be positive");
  if (!(beta >= 0.0)) throw ConfigError("tuner: beta must be >= 0");
  if (!(beta_schedule.growth >= 0.0))
    throw ConfigError("tuner: beta growth must be >= 0");
  if (grid_price_steps < 1 || grid_setpoint_steps < 1)
    throw ConfigError("tuner: grid needs at least one value per dimension");
  if (!domain.contains(seed_theta))
    throw ConfigError("tuner: seed parameter outside the parameter set");
  if (solver.tolerance <= 0.0 || solver.max_iterations < 1)
    throw ConfigError("tuner: invalid solver options");
}

namespace {

double grid_value(double lo, double hi, int steps, int i) {
  if (steps == 1) return 0.5 * (lo + hi);
  if (i == steps - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
}

Eigen::VectorXd coord_of(const TunerConfig& cfg, const ParamPoint& theta,
                         Context z) {
  return normalize_point({theta, z}, cfg.domain, cfg.kernel.contextual);
}

// Cholesky of the dataset Gram matrix and the MLE over it. A non-converged
// MLE is retried once with a 10× looser tolerance.
void refresh(TunerState& s) {
  const TunerConfig& cfg = s.config;
  s.coords.clear();
  for (const EvalPoint& p : s.dataset.points())
    s.coords.push_back(
        normalize_point(p, cfg.domain, cfg.kernel.contextual));
  const Eigen::MatrixXd K = gram_matrix(s.coords, cfg.kernel);
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw SolverError("tuner: Gram matrix is not positive definite at day " +
                      std::to_string(s.dataset.size() - 1));
  s.chol_lower = llt.matrixL();

  MleResult mle;
  try {
    mle = solve_mle_factored(s.dataset.outcomes(), s.chol_lower,
                             cfg.rkhs_bound, cfg.solver);
  } catch (const SolverError&) {
    SolverOptions loose = cfg.solver;
    loose.tolerance *= 10.0;
    try {
      mle = solve_mle_factored(s.dataset.outcomes(), s.chol_lower,
                               cfg.rkhs_bound, loose);
    } catch (const SolverError& e) {
      throw SolverError("tuner: MLE failed at day " +
                        std::to_string(s.dataset.size() - 1) + ": " +
                        e.what());
    }
  }
  s.mle_alpha = mle.alpha;
  s.cs.rkhs_bound = cfg.rkhs_bound;
  s.cs.beta = cfg.beta_at(s.dataset.num_comparisons());
  s.cs.ell_mle = mle.log_likelihood;
  s.cs.mle_vector = mle.utilities;
}

}  // namespace

std::vector<ParamPoint> make_theta_grid(const TunerConfig& cfg) {
  const Domain& d = cfg.domain;
  std::vector<ParamPoint> grid;
  grid.reserve(static_cast<std::size_t>(cfg.grid_price_steps) *
               cfg.grid_setpoint_steps);
  for (int i = 0; i < cfg.grid_price_steps; ++i)
    for (int j = 0; j < cfg.grid_setpoint_steps; ++j)
      grid.push_back({grid_value(d.price_threshold_min, d.price_threshold_max,
                                 cfg.grid_price_steps, i),
                      grid_value(d.setpoint_min, d.setpoint_max,
                                 cfg.grid_setpoint_steps, j)});
  return grid;
}

TunerState make_tuner_state(const TunerConfig& cfg, Context z0) {
  cfg.validate();
  return make_tuner_state(
      cfg, PreferenceDataset(EvalPoint{cfg.seed_theta, cfg.domain.clamp(z0)}));
}

TunerState make_tuner_state(const TunerConfig& cfg, PreferenceDataset data) {
  cfg.validate();
  TunerState s{cfg, std::move(data), {}, make_theta_grid(cfg), {}, {}, {}};
  refresh(s);
  return s;
}

AcquisitionProblem make_acquisition_problem(const TunerState& state) {
  return AcquisitionProblem(state.chol_lower, state.dataset.outcomes(),
                            state.mle_alpha, state.cs.ell_mle, state.cs.beta,
                            state.cs.rkhs_bound);
}

AcquisitionResult acquisition_solve(const AcquisitionProblem& problem,
                                    const TunerState& state,
                                    const ParamPoint& theta, Context z,
                                    const SolverOptions& options,
                                    const AcquisitionResult* warm) {
  const Eigen::VectorXd x = coord_of(state.config, theta, z);
  const Eigen::VectorXd kc = kernel_column(x, state.coords, state.config.kernel);
  return problem.evaluate(kc, 1.0 + state.config.kernel.jitter, options, warm);
}

double acquisition_value(const ParamPoint& theta, Context z,
                         const TunerState& state) {
  const AcquisitionProblem problem = make_acquisition_problem(state);
  AcquisitionResult r =
      acquisition_solve(problem, state, theta, z, state.config.solver);
  if (!r.converged) {
    SolverOptions loose = state.config.solver;
    loose.tolerance *= 10.0;
    r = acquisition_solve(problem, state, theta, z, loose);
    if (!r.converged)
      throw SolverError("acquisition did not converge at day " +
                        std::to_string(state.next_day()));
  }
  return r.value;
}

Proposal propose_detailed(const TunerState& state, Context z) {
  z = state.config.domain.clamp(z);
  const AcquisitionProblem problem = make_acquisition_problem(state);
  Proposal best;
  bool have_best = false;
  AcquisitionResult prev;
  bool have_prev = false;
  for (std::size_t i = 0; i < state.theta_grid.size(); ++i) {
    const ParamPoint& theta = state.theta_grid[i];
    AcquisitionResult r =
        acquisition_solve(problem, state, theta, z, state.config.solver,
                          have_prev ? &prev : nullptr);
    if (!r.converged) {
      SolverOptions loose = state.config.solver;
      loose.tolerance *= 10.0;
      r = acquisition_solve(problem, state, theta, z, loose);
      ++best.retries;
      if (!r.converged)
        throw SolverError("acquisition did not converge at day " +
                          std::to_string(state.next_day()) +
                          " for grid index " + std::to_string(i));
    }
    if (!have_best || r.value > best.value) {
      best.theta = theta;
      best.grid_index = i;
      best.value = r.value;
      have_best = true;
    }
    prev = std::move(r);
    have_prev = true;
  }
  return best;
}

ParamPoint propose(const TunerState& state, Context z) {
  return propose_detailed(state, z).theta;
}

TunerState update(const TunerState& state, const ParamPoint& theta, Context z,
                  int outcome) {
  TunerState next = state;
  next.dataset.append({theta, state.config.domain.clamp(z)}, outcome);
  refresh(next);
  return next;
}

double predicted_utility(const TunerState& state, const ParamPoint& theta,
                         Context z) {
  const Eigen::VectorXd weights =
      state.chol_lower.transpose().triangularView<Eigen::Upper>().solve(
          state.mle_alpha);
  const Eigen::VectorXd kc = kernel_column(coord_of(state.config, theta, z),
                                           state.coords, state.config.kernel);
  return kc.dot(weights);
}

std::vector<double> predict_optimal_theta2(const TunerState& state,
                                           const std::vector<Context>& zs) {
  if (state.dataset.num_comparisons() < 5)
    throw InsufficientDataError(
        "predict_optimal_theta2 needs at least 5 comparisons, have " +
        std::to_string(state.dataset.num_comparisons()));
  // J_MLE = L α, so K⁻¹ J_MLE = L⁻ᵀ α.
  const Eigen::VectorXd weights =
      state.chol_lower.transpose().triangularView<Eigen::Upper>().solve(
          state.mle_alpha);
  std::vector<double> out;
  out.reserve(zs.size());
  for (Context z : zs) {
    double best = 0.0;
    double best_theta2 = 0.0;
    bool have = false;
    for (const ParamPoint& theta : state.theta_grid) {
      const Eigen::VectorXd kc = kernel_column(
          coord_of(state.config, theta, z), state.coords, state.config.kernel);
      const double u = kc.dot(weights);
      if (!have || u > best) {
        best = u;
        best_theta2 = theta.lower_setpoint;
        have = true;
      }
    }
    out.push_back(best_theta2);
  }
  return out;
}

}  // namespace cpbo
