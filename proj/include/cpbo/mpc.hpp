#pragma once

#include <span>
#include <string>
#include <vector>

#include "cpbo/arx.hpp"
#include "cpbo/errors.hpp"
#include "cpbo/kernels.hpp"
#include "cpbo/lp.hpp"

namespace cpbo {

struct MpcConfig {
  int horizon = 64;
  double step_seconds = 900.0;
  double slack_weight = 1000.0;
  double upper_bound = 26.0;         // °C
  double high_price_lower = 20.0;    // daytime lower bound when p > θ₁
  double night_lower = 15.0;
  double day_start_hour = 8.0;
  double day_end_hour = 18.0;
  double heater_kw = 5.0;            // nominal radiator power

  double step_kwh() const { return heater_kw * step_seconds / 3600.0; }
  bool is_daytime(double hour_of_day) const {
    return hour_of_day >= day_start_hour && hour_of_day < day_end_hour;
  }
  void validate() const;
};

struct BoundsSchedule {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Entry h bounds the prediction for time k+h+1; `price` and `hour_of_day`
// are taken at that same instant.
BoundsSchedule build_bounds_schedule(std::span<const double> price,
                                     std::span<const double> hour_of_day,
                                     const ParamPoint& theta, const MpcConfig& cfg);

// Perfect forecasts over the horizon, indexed from the current step k:
// entries 0..N (N+1 values each).
struct MpcForecast {
  std::vector<double> outdoor;
  std::vector<double> solar;
  std::vector<double> price;
  std::vector<double> hour_of_day;
};

// Variable layout: valve u_0..u_{N−1}, slacks ε_1..ε_N (°C), normalized
// predictions ỹ_1..ỹ_N. One equality row per prediction, two inequality
// rows (lower, upper) per prediction.
struct MpcLp {
  LpProblem problem;
  int horizon = 0;
  Eigen::Index valve_index(int h) const { return h; }
  Eigen::Index slack_index(int h) const { return horizon + h; }
  Eigen::Index output_index(int h) const { return 2 * horizon + h; }
};

// `window` holds the last 10 measurements ending at time k; its time-k
// inputs are replaced by the decision and the forecasts.
MpcLp build_lp(const ArxModel& m, const IoWindow& window, const MpcForecast& fc,
               const BoundsSchedule& sched, const MpcConfig& cfg);

struct MpcPlan {
  LpSolution lp;
  std::vector<double> valve;
  std::vector<double> slack;
  std::vector<double> predicted;  // °C, times k+1..k+N
};

// Raised when the LP solver does not report optimal; carries the instance so
// callers can dump it for replay.
class LpFailure : public SolverError {
 public:
  LpFailure(const std::string& what, LpProblem problem)
      : SolverError(what), problem_(std::move(problem)) {}
  const LpProblem& problem() const { return problem_; }

 private:
  LpProblem problem_;
};

// Solves and unpacks; throws LpFailure unless the status is optimal.
MpcPlan solve_mpc(const MpcLp& lp, const ArxModel& m, const LpOptions& options = {});

double mpc_step(const ArxModel& m, const IoWindow& window, const MpcForecast& fc,
                const ParamPoint& theta, const MpcConfig& cfg);

}  // namespace cpbo
