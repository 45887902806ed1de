#pragma once

// Randomized comparisons of library routines against the brute-force
// oracles. Shared by the unit tests, the acceptance binary and the
// `oracle` CLI subcommand.

#include <random>
#include <string>
#include <vector>

#include "cpbo/arx.hpp"
#include "cpbo/mpc.hpp"
#include "oracles.hpp"

namespace cpbo::oracle {

struct SuiteReport {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Preference MLE vs sampling + polish: t ∈ {1, 2, 3}, B ∈ {1, 5}.
SuiteReport suite_mle(int instances = 50, double tol = 1e-3);
// Acquisition value vs constrained brute force, t ≤ 3; J feasible to 1e-6.
SuiteReport suite_acquisition(int instances = 30, double tol = 1e-3);
// Seed day only: value equals B·√(2 − 2k) (jitter 0).
SuiteReport suite_empty_data(int instances = 20, double tol = 1e-6);
// N = 4 MPC LPs vs valve enumeration; KKT residuals within kkt_tol.
SuiteReport suite_lp(int instances = 20, double kkt_tol = 1e-6);
// PMV vs the bisection reference over 16..30 °C.
SuiteReport suite_pmv(double tol = 0.01);
// 900 s plant step vs 1 s RK4 over random states and inputs.
SuiteReport suite_plant_refinement(double tol = 0.01);

// Noiseless synthetic data (ridge 1e-8): coefficients within coef_tol.
// Equation-error noise σ = 0.05 °C: held-out one-step RMSE within rmse_tol.
SuiteReport suite_arx(int instances = 5, double coef_tol = 1e-6, double rmse_tol = 0.075);

std::vector<SuiteReport> run_all_suites();
// Prints one line per suite; returns the number of failed suites.
int run_all(bool verbose);

// A random, stable order-10 model with plausible statistics, a history
// window near 20 °C, forecasts and bounds for an N-step MPC.
struct MpcInstance {
  ArxModel model;
  IoWindow window;
  MpcForecast forecast;
  BoundsSchedule bounds;
  MpcConfig config;
};

MpcInstance random_mpc_instance(std::mt19937_64& rng, int horizon);

// Free response and valve impulse response in °C, computed by direct
// recursion on the raw-unit model, plus the LP's bounds and costs.
EnumerationInstance enumeration_instance(const MpcInstance& inst);

// Data generated by a known ARX model whose training part has zero-mean
// normalized channels, so the fitted (intercept-free) normalized model can
// reproduce it exactly. `a` and `b` are the true coefficients in the
// coordinates fit_arx will use on `train`.
struct SyntheticArx {
  IoSeries train;
  IoSeries test;
  Eigen::Matrix<double, kArxOrder, 1> a;
  Eigen::Matrix<double, kArxInputs, kArxOrder> b;
};

// `noise_sd` is in °C and enters the recursion (equation error).
SyntheticArx synthetic_arx(std::mt19937_64& rng, std::size_t n_train, std::size_t n_test,
                           double noise_sd);

}  // namespace cpbo::oracle
