#include "cpbo/mpc.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cpbo/table_io.hpp"

namespace cpbo {

void MpcConfig::validate() const {
  if (horizon < 1) throw ConfigError("mpc: horizon must be >= 1");
  if (!(step_seconds > 0.0)) throw ConfigError("mpc: step must be positive");
  if (!(heater_kw > 0.0)) throw ConfigError("mpc: heater power must be positive");
  if (!(high_price_lower < upper_bound) || !(night_lower < upper_bound))
    throw ConfigError("mpc: lower bounds must sit below the upper bound");
  if (!(day_start_hour < day_end_hour))
    throw ConfigError("mpc: daytime window is empty");
  // Slack must never be cheaper than a full step of heating at any price.
  if (!(slack_weight > step_kwh()))
    throw ConfigError("mpc: slack weight does not dominate the energy price");
}

BoundsSchedule build_bounds_schedule(std::span<const double> price,
                                     std::span<const double> hour_of_day,
                                     const ParamPoint& theta, const MpcConfig& cfg) {
  const auto N = static_cast<std::size_t>(cfg.horizon);
  if (price.size() < N || hour_of_day.size() < N)
    throw DimensionError("bounds schedule: forecast shorter than the horizon");
  if (!(theta.lower_setpoint <= cfg.upper_bound))
    throw ConfigError("bounds schedule: setpoint above the upper bound");
  BoundsSchedule s;
  s.lower.resize(N);
  s.upper.assign(N, cfg.upper_bound);
  for (std::size_t h = 0; h < N; ++h) {
    if (!cfg.is_daytime(hour_of_day[h]))
      s.lower[h] = cfg.night_lower;
    else if (price[h] <= theta.price_threshold)
      s.lower[h] = theta.lower_setpoint;
    else
      s.lower[h] = cfg.high_price_lower;
  }
  return s;
}

MpcLp build_lp(const ArxModel& m, const IoWindow& window, const MpcForecast& fc,
               const BoundsSchedule& sched, const MpcConfig& cfg) {
  cfg.validate();
  const int N = cfg.horizon;
  const auto need = static_cast<std::size_t>(N);
  if (fc.outdoor.size() < need || fc.solar.size() < need || fc.price.size() < need)
    throw DimensionError("build_lp: forecast shorter than the horizon");
  if (sched.lower.size() != need || sched.upper.size() != need)
    throw DimensionError("build_lp: bounds schedule does not match the horizon");

  MpcLp out;
  out.horizon = N;
  LpProblem& p = out.problem;
  const Eigen::Index n = 3 * N;
  constexpr double inf = std::numeric_limits<double>::infinity();
  p.c = Eigen::VectorXd::Zero(n);
  p.lower = Eigen::VectorXd::Constant(n, -inf);
  p.upper = Eigen::VectorXd::Constant(n, inf);
  for (int h = 0; h < N; ++h) {
    p.c[out.valve_index(h)] = fc.price[static_cast<std::size_t>(h)] * cfg.step_kwh();
    p.lower[out.valve_index(h)] = 0.0;
    p.upper[out.valve_index(h)] = 1.0;
    p.c[out.slack_index(h)] = cfg.slack_weight;
    p.lower[out.slack_index(h)] = 0.0;
  }

  Eigen::Matrix<double, kArxOrder, 1> y_hist;
  for (int j = 0; j < kArxOrder; ++j) y_hist[j] = m.y_stats.normalize(window.y[j]);
  const ChannelStats& vs = m.u_stats[0];
  // Normalized exogenous input i at offset o ≥ 0 from the forecasts.
  auto exo = [&](int i, int o) {
    const auto k = static_cast<std::size_t>(o);
    return m.u_stats[i].normalize(i == 1 ? fc.outdoor[k] : fc.solar[k]);
  };

  std::vector<Eigen::Triplet<double>> ta;
  p.b = Eigen::VectorXd::Zero(N);
  for (int h = 0; h < N; ++h) {
    double rhs = 0.0;
    ta.emplace_back(h, out.output_index(h), 1.0);
    for (int j = 0; j < kArxOrder; ++j) {
      const int o = h - (kArxOrder - 1) + j;  // time offset from k
      if (o <= 0)
        rhs += m.a[j] * y_hist[kArxOrder - 1 + o];
      else
        ta.emplace_back(h, out.output_index(o - 1), -m.a[j]);
      if (o < 0) {
        for (int i = 0; i < kArxInputs; ++i)
          rhs += m.b(i, j) * m.u_stats[i].normalize(window.u(i, kArxOrder - 1 + o));
      } else {
        ta.emplace_back(h, out.valve_index(o), -m.b(0, j) / vs.scale);
        rhs -= m.b(0, j) * vs.mean / vs.scale;
        for (int i = 1; i < kArxInputs; ++i) rhs += m.b(i, j) * exo(i, o);
      }
    }
    p.b[h] = rhs;
  }
  p.A.resize(N, n);
  p.A.setFromTriplets(ta.begin(), ta.end());

  std::vector<Eigen::Triplet<double>> tg;
  p.h.resize(2 * N);
  const double sy = m.y_stats.scale, my = m.y_stats.mean;
  for (int h = 0; h < N; ++h) {
    const auto k = static_cast<std::size_t>(h);
    tg.emplace_back(2 * h, out.output_index(h), -sy);
    tg.emplace_back(2 * h, out.slack_index(h), -1.0);
    p.h[2 * h] = my - sched.lower[k];
    tg.emplace_back(2 * h + 1, out.output_index(h), sy);
    tg.emplace_back(2 * h + 1, out.slack_index(h), -1.0);
    p.h[2 * h + 1] = sched.upper[k] - my;
  }
  p.G.resize(2 * N, n);
  p.G.setFromTriplets(tg.begin(), tg.end());
  return out;
}

MpcPlan solve_mpc(const MpcLp& lp, const ArxModel& m, const LpOptions& options) {
  MpcPlan plan;
  plan.lp = solve_lp(lp.problem, options);
  if (plan.lp.status != LpStatus::optimal)
    throw LpFailure("mpc: LP solve ended with status " + to_string(plan.lp.status) +
                        " after " + std::to_string(plan.lp.iterations) +
                        " iterations (primal " +
                        format_double(plan.lp.residuals.primal) + ", dual " +
                        format_double(plan.lp.residuals.dual) + ", complementarity " +
                        format_double(plan.lp.residuals.complementarity) + ")",
                    lp.problem);
  const Eigen::VectorXd& x = plan.lp.x;
  for (int h = 0; h < lp.horizon; ++h) {
    plan.valve.push_back(std::clamp(x[lp.valve_index(h)], 0.0, 1.0));
    plan.slack.push_back(std::max(0.0, x[lp.slack_index(h)]));
    plan.predicted.push_back(m.y_stats.denormalize(x[lp.output_index(h)]));
  }
  return plan;
}

double mpc_step(const ArxModel& m, const IoWindow& window, const MpcForecast& fc,
                const ParamPoint& theta, const MpcConfig& cfg) {
  const auto N = static_cast<std::size_t>(cfg.horizon);
  if (fc.price.size() < N + 1 || fc.hour_of_day.size() < N + 1)
    throw DimensionError("mpc_step: forecast needs horizon + 1 entries");
  const BoundsSchedule sched = build_bounds_schedule(
      std::span<const double>(fc.price).subspan(1, N),
      std::span<const double>(fc.hour_of_day).subspan(1, N), theta, cfg);
  const MpcLp lp = build_lp(m, window, fc, sched, cfg);
  return solve_mpc(lp, m).valve.front();
}

}  // namespace cpbo
