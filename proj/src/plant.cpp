#include "cpbo/plant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cpbo/errors.hpp"

namespace cpbo {

void RcParams::validate() const {
  if (!(zone_capacity > 0.0 && wall_capacity > 0.0 && r_zone_wall > 0.0 &&
        r_wall_out > 0.0))
    throw ConfigError("plant: capacities and resistances must be positive");
  if (!(heater_power >= 0.0 && solar_gain_area >= 0.0))
    throw ConfigError("plant: heater power and solar gain must be >= 0");
  if (!(substep > 0.0) || std::fmod(kStepSeconds, substep) != 0.0)
    throw ConfigError("plant: substep must divide the 900 s step");
  if (!(temp_min < temp_max)) throw ConfigError("plant: empty sanity range");
}

PlantState plant_step(const PlantState& s, double valve, double outdoor, double solar,
                      const RcParams& p) {
  if (!(valve >= 0.0 && valve <= 1.0))
    throw ConfigError("plant_step: valve " + std::to_string(valve) + " outside [0, 1]");
  PlantState n = s;
  const int substeps = static_cast<int>(std::lround(kStepSeconds / p.substep));
  const double gain = valve * p.heater_power + p.solar_gain_area * solar;
  auto deriv = [&](double z, double w) {
    const double q_zw = (w - z) / p.r_zone_wall;
    const double q_wo = (outdoor - w) / p.r_wall_out;
    return std::array<double, 2>{(q_zw + gain) / p.zone_capacity,
                                 (q_wo - q_zw) / p.wall_capacity};
  };
  // Classical RK4 per sub-step.
  const double h = p.substep;
  for (int i = 0; i < substeps; ++i) {
    const double z = n.zone_temp, w = n.wall_temp;
    const auto k1 = deriv(z, w);
    const auto k2 = deriv(z + 0.5 * h * k1[0], w + 0.5 * h * k1[1]);
    const auto k3 = deriv(z + 0.5 * h * k2[0], w + 0.5 * h * k2[1]);
    const auto k4 = deriv(z + h * k3[0], w + h * k3[1]);
    n.zone_temp = z + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    n.wall_temp = w + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
  }
  for (double* t : {&n.zone_temp, &n.wall_temp}) {
    if (*t < p.temp_min || *t > p.temp_max || !std::isfinite(*t)) {
      *t = std::isfinite(*t) ? std::clamp(*t, p.temp_min, p.temp_max) : p.temp_min;
      ++n.clamp_events;
    }
  }
  n.clock = s.clock + kStepSeconds;
  return n;
}

double TrajectoryLog::energy_kwh() const {
  double e = 0.0;
  for (double q : heat_kw) e += q * kStepHours;
  return e;
}

void TrajectoryLog::validate() const {
  const std::size_t n = zone_temp.size();
  if (valve.size() != n || heat_kw.size() != n || price.size() != n ||
      outdoor.size() != n || solar.size() != n)
    throw DimensionError("trajectory log: columns have different lengths");
  if (n != static_cast<std::size_t>(kStepsPerDay))
    throw DimensionError("trajectory log: expected 96 steps, got " + std::to_string(n));
}

int baseline_command(double hour_of_day, double y, bool previously_on,
                     const BaselineController::Settings& s) {
  const bool day = hour_of_day >= s.day_start_hour && hour_of_day < s.day_end_hour;
  const double sp = day ? s.day_setpoint : s.night_setpoint;
  if (y < sp - s.band) return 1;
  if (y > sp + s.band) return 0;
  return previously_on ? 1 : 0;
}

double BaselineController::setpoint(double hour_of_day) const {
  const bool day = hour_of_day >= s_.day_start_hour && hour_of_day < s_.day_end_hour;
  return day ? s_.day_setpoint : s_.night_setpoint;
}

double BaselineController::command(const StepInfo& info, const IoSeries&) {
  on_ = baseline_command(info.hour_of_day, info.zone_temp, on_, s_) == 1;
  return on_ ? 1.0 : 0.0;
}

double ExcitationController::command(const StepInfo& info, const IoSeries&) {
  return excitation_control(info.zone_temp, lower_, upper_, rng_);
}

MpcForecast make_forecast(const WeatherSource& w, long long abs_step, int horizon) {
  MpcForecast fc;
  for (int h = 0; h <= horizon; ++h) {
    const long long k = abs_step + h;
    fc.outdoor.push_back(w.outdoor_at(k));
    fc.solar.push_back(w.solar_at(k));
    fc.price.push_back(w.price_at(k));
    fc.hour_of_day.push_back(hour_of_step(static_cast<int>(k % kStepsPerDay)));
  }
  return fc;
}

double MpcController::command(const StepInfo& info, const IoSeries& history) {
  if (history.size() + 1 < static_cast<std::size_t>(kArxOrder))
    throw InsufficientDataError("mpc controller: fewer than 9 past samples");
  const MpcForecast fc = make_forecast(weather_, info.abs_step(), cfg_.horizon);
  IoWindow w;
  const std::size_t first = history.size() - (kArxOrder - 1);
  for (int j = 0; j + 1 < kArxOrder; ++j) {
    w.y[j] = history.y[first + j];
    for (int i = 0; i < kArxInputs; ++i) w.u(i, j) = history.u[i][first + j];
  }
  w.y[kArxOrder - 1] = info.zone_temp;
  w.u.col(kArxOrder - 1) << 0.0, fc.outdoor[0], fc.solar[0];
  return mpc_step(model_, w, fc, theta_, cfg_);
}

DayRun simulate_day(Controller& controller, const PlantState& start,
                    const WeatherDay& weather, IoSeries& history, const RcParams& p) {
  p.validate();
  DayRun run;
  run.log.day = weather.day;
  PlantState s = start;
  for (int k = 0; k < kStepsPerDay; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    StepInfo info{weather.day, k, hour_of_step(k), s.zone_temp};
    double valve = 0.0;
    const std::string where = " (controller " + controller.name() + ", day " +
                              std::to_string(weather.day) + ", step " +
                              std::to_string(k) + ")";
    try {
      valve = controller.command(info, history);
    } catch (const LpFailure& e) {
      throw LpFailure(e.what() + where, e.problem());
    } catch (const SolverError& e) {
      throw SolverError(e.what() + where);
    }
    if (!std::isfinite(valve)) throw SolverError("non-finite valve command" + where);
    valve = std::clamp(valve, 0.0, 1.0);
    run.log.zone_temp.push_back(s.zone_temp);
    run.log.valve.push_back(valve);
    run.log.heat_kw.push_back(valve * p.heater_power / 1000.0);
    run.log.price.push_back(weather.price[ks]);
    run.log.outdoor.push_back(weather.outdoor[ks]);
    run.log.solar.push_back(weather.solar[ks]);
    history.push_back(s.zone_temp, {valve, weather.outdoor[ks], weather.solar[ks]});
    s = plant_step(s, valve, weather.outdoor[ks], weather.solar[ks], p);
  }
  run.end = s;
  return run;
}

}  // namespace cpbo
