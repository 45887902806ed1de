#pragma once

#include <string>

#include "cpbo/plant.hpp"
#include "cpbo/rng.hpp"
#include "cpbo/weather.hpp"

namespace cpbo {

enum class OccupantKind { energy, comfort };
enum class FeedbackMode { deterministic, logistic };

std::string to_string(OccupantKind k);
std::string to_string(FeedbackMode m);
OccupantKind parse_occupant_kind(const std::string& s);
FeedbackMode parse_feedback_mode(const std::string& s);

struct OccupantConfig {
  OccupantKind kind = OccupantKind::comfort;
  FeedbackMode feedback = FeedbackMode::deterministic;
  double utility_scale = 10.0;  // divisor before the logistic link
  double day_start_hour = 8.0;
  double day_end_hour = 18.0;

  // Defaults per kind: 1 EUR for energy, 10 discomfort units for comfort.
  static OccupantConfig for_kind(OccupantKind k);
  void validate() const;
};

// Fixed PMV inputs besides the air temperature (mean radiant = air).
struct PmvInputs {
  double metabolic_rate = 1.2;  // met
  double clothing = 1.0;        // clo
  double air_speed = 0.1;       // m/s
  double relative_humidity = 50.0;  // %
};

// Fanger / ISO 7730 predicted mean vote.
double pmv(double air_temp, const PmvInputs& in = {});
// 100 − 95·exp(−0.03353·PMV⁴ − 0.2179·PMV²).
double ppd(double pmv_value);

// Σ Q_k p_k · 0.25 h, EUR.
double energy_cost(const TrajectoryLog& log);

struct DiscomfortBreakdown {
  double ppd_mean = 0.0;   // over daytime steps
  double t_ave = 0.0;      // daytime mean indoor, °C
  double t_env = 0.0;      // daily mean outdoor, °C
  double adaptive = 0.0;   // 100 (T_ave − (T_env + 20))²
  double total() const { return ppd_mean + adaptive; }
};

DiscomfortBreakdown discomfort_breakdown(const TrajectoryLog& log, const WeatherDay& weather,
                                         double day_start_hour = 8.0,
                                         double day_end_hour = 18.0);
double discomfort(const TrajectoryLog& log, const WeatherDay& weather,
                  double day_start_hour = 8.0, double day_end_hour = 18.0);

struct DayResult {
  int day = 0;
  double cost = 0.0;        // c_t, EUR
  double discomfort = 0.0;  // d_t
  double t_ave = 0.0;
  double t_env = 0.0;
  double utility = 0.0;     // J
};

DayResult evaluate_day(const TrajectoryLog& log, const WeatherDay& weather,
                       const OccupantConfig& cfg);

// Deterministic: 1 iff J_now ≥ J_prev. Logistic: Bernoulli(σ((J_now − J_prev)/scale)).
int preference_feedback(double j_now, double j_prev, const OccupantConfig& cfg,
                        RandomStream& rng);

}  // namespace cpbo
