#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cpbo/arx.hpp"
#include "cpbo/mpc.hpp"
#include "cpbo/rng.hpp"
#include "cpbo/weather.hpp"

namespace cpbo {

// Two-node (zone, wall) thermal network.
struct RcParams {
  double zone_capacity = 1.4e7;   // J/K, full heating starts at 1.3 °C/h
  double wall_capacity = 2.0e7;   // J/K
  double r_zone_wall = 2.0e-3;    // K/W
  double r_wall_out = 4.5e-3;     // K/W
  double solar_gain_area = 3.0;   // m², W per W/m²
  double heater_power = 5000.0;   // W at valve = 1
  double substep = 60.0;          // s, RK4 sub-step
  double temp_min = -30.0;        // sanity clamp, °C
  double temp_max = 50.0;

  void validate() const;
};

struct PlantState {
  double zone_temp = 20.0;  // °C
  double wall_temp = 15.0;  // °C
  double clock = 0.0;       // s since day 0, 00:00
  int clamp_events = 0;     // times the sanity clamp fired

  bool operator==(const PlantState&) const = default;
};

// Advances one 900 s step with inputs held constant.
PlantState plant_step(const PlantState& s, double valve, double outdoor, double solar,
                      const RcParams& p = {});

struct TrajectoryLog {
  int day = 0;
  std::vector<double> zone_temp;  // °C at the start of each step
  std::vector<double> valve;      // [0, 1]
  std::vector<double> heat_kw;    // Q
  std::vector<double> price;      // EUR/kWh
  std::vector<double> outdoor;    // °C
  std::vector<double> solar;      // W/m²

  std::size_t size() const { return zone_temp.size(); }
  double energy_kwh() const;
  void validate() const;
};

struct StepInfo {
  int day = 0;
  int step = 0;  // 0..95
  double hour_of_day = 0.0;
  double zone_temp = 0.0;
  long long abs_step() const { return static_cast<long long>(day) * kStepsPerDay + step; }
};

class Controller {
 public:
  virtual ~Controller() = default;
  // `history` holds every completed step so far (measurement and inputs).
  virtual double command(const StepInfo& info, const IoSeries& history) = 0;
  virtual std::string name() const = 0;
};

// Hysteresis thermostat: on below setpoint − band, off above setpoint + band.
class BaselineController : public Controller {
 public:
  struct Settings {
    double day_setpoint = 22.0;
    double night_setpoint = 19.0;
    double band = 0.5;
    double day_start_hour = 8.0;
    double day_end_hour = 18.0;
  };
  BaselineController() = default;
  explicit BaselineController(Settings s) : s_(s) {}

  double command(const StepInfo& info, const IoSeries& history) override;
  std::string name() const override { return "baseline"; }
  double setpoint(double hour_of_day) const;
  bool heating() const { return on_; }
  void set_heating(bool on) { on_ = on; }

 private:
  Settings s_;
  bool on_ = false;
};

int baseline_command(double hour_of_day, double y, bool previously_on,
                     const BaselineController::Settings& s = {});

class ExcitationController : public Controller {
 public:
  ExcitationController(double lower, double upper, RandomStream rng)
      : lower_(lower), upper_(upper), rng_(std::move(rng)) {}
  double command(const StepInfo& info, const IoSeries& history) override;
  std::string name() const override { return "excitation"; }

 private:
  double lower_, upper_;
  RandomStream rng_;
};

// Economic MPC with fixed θ and perfect forecasts read from the weather source.
class MpcController : public Controller {
 public:
  MpcController(const ArxModel& model, const WeatherSource& weather, MpcConfig cfg,
                ParamPoint theta)
      : model_(model), weather_(weather), cfg_(std::move(cfg)), theta_(theta) {}
  double command(const StepInfo& info, const IoSeries& history) override;
  std::string name() const override { return "mpc"; }
  void set_theta(const ParamPoint& t) { theta_ = t; }
  const ParamPoint& theta() const { return theta_; }

 private:
  const ArxModel& model_;
  const WeatherSource& weather_;
  MpcConfig cfg_;
  ParamPoint theta_;
};

MpcForecast make_forecast(const WeatherSource& w, long long abs_step, int horizon);

struct DayRun {
  TrajectoryLog log;
  PlantState end;
};

// Runs the 96 steps of one day. Each completed step is appended to
// `history`. Controller failures are rethrown with the day and step.
DayRun simulate_day(Controller& controller, const PlantState& start,
                    const WeatherDay& weather, IoSeries& history,
                    const RcParams& p = {});

}  // namespace cpbo
