#include "cpbo/occupants.hpp"

#include <algorithm>
#include <cmath>

#include "cpbo/errors.hpp"
#include "cpbo/preference.hpp"

namespace cpbo {

std::string to_string(OccupantKind k) {
  return k == OccupantKind::energy ? "energy" : "comfort";
}

std::string to_string(FeedbackMode m) {
  return m == FeedbackMode::deterministic ? "deterministic" : "logistic";
}

OccupantKind parse_occupant_kind(const std::string& s) {
  if (s == "energy") return OccupantKind::energy;
  if (s == "comfort") return OccupantKind::comfort;
  throw ConfigError("unknown occupant kind '" + s + "' (expected energy or comfort)");
}

FeedbackMode parse_feedback_mode(const std::string& s) {
  if (s == "deterministic") return FeedbackMode::deterministic;
  if (s == "logistic") return FeedbackMode::logistic;
  throw ConfigError("unknown feedback mode '" + s +
                    "' (expected deterministic or logistic)");
}

OccupantConfig OccupantConfig::for_kind(OccupantKind k) {
  OccupantConfig c;
  c.kind = k;
  c.utility_scale = k == OccupantKind::energy ? 1.0 : 10.0;
  return c;
}

void OccupantConfig::validate() const {
  if (!(utility_scale > 0.0)) throw ConfigError("occupant: utility_scale must be > 0");
  if (!(day_start_hour < day_end_hour))
    throw ConfigError("occupant: daytime window is empty");
}

double pmv(double air_temp, const PmvInputs& in) {
  if (!(air_temp >= 10.0 && air_temp <= 35.0))
    throw ConfigError("pmv: air temperature " + std::to_string(air_temp) +
                      " outside [10, 35]");
  const double ta = air_temp;
  const double tr = air_temp;
  const double pa =
      in.relative_humidity * 10.0 * std::exp(16.6536 - 4030.183 / (ta + 235.0));
  const double icl = 0.155 * in.clothing;
  const double m = in.metabolic_rate * 58.15;
  const double mw = m;  // no external work
  const double fcl = icl <= 0.078 ? 1.0 + 1.29 * icl : 1.05 + 0.645 * icl;
  const double hcf = 12.1 * std::sqrt(in.air_speed);
  const double taa = ta + 273.0;
  const double tra = tr + 273.0;

  // Clothing surface temperature by damped fixed-point iteration, in units
  // of 100 K.
  const double p1 = icl * fcl;
  const double p2 = p1 * 3.96;
  const double p3 = p1 * 100.0;
  const double p4 = p1 * taa;
  const double p5 = 308.7 - 0.028 * mw + p2 * std::pow(tra / 100.0, 4);
  const double tcla = taa + (35.5 - ta) / (3.5 * icl + 0.1);
  double xn = tcla / 100.0;
  double xf = tcla / 50.0;
  double hc = hcf;
  int n = 0;
  while (std::abs(xn - xf) > 1e-6) {
    if (++n > 150) throw SolverError("pmv: clothing temperature did not converge");
    xf = 0.5 * (xf + xn);
    const double hcn = 2.38 * std::pow(std::abs(100.0 * xf - taa), 0.25);
    hc = std::max(hcf, hcn);
    xn = (p5 + p4 * hc - p2 * std::pow(xf, 4)) / (100.0 + p3 * hc);
  }
  const double tcl = 100.0 * xn - 273.0;

  const double hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa);
  const double hl2 = mw > 58.15 ? 0.42 * (mw - 58.15) : 0.0;
  const double hl3 = 1.7e-5 * m * (5867.0 - pa);
  const double hl4 = 0.0014 * m * (34.0 - ta);
  const double hl5 = 3.96 * fcl * (std::pow(xn, 4) - std::pow(tra / 100.0, 4));
  const double hl6 = fcl * hc * (tcl - ta);
  const double ts = 0.303 * std::exp(-0.036 * m) + 0.028;
  return ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6);
}

double ppd(double v) {
  const double v2 = v * v;
  return 100.0 - 95.0 * std::exp(-0.03353 * v2 * v2 - 0.2179 * v2);
}

double energy_cost(const TrajectoryLog& log) {
  log.validate();
  double c = 0.0;
  for (std::size_t k = 0; k < log.size(); ++k)
    c += log.heat_kw[k] * log.price[k] * kStepHours;
  return c;
}

DiscomfortBreakdown discomfort_breakdown(const TrajectoryLog& log, const WeatherDay& weather,
                                         double day_start_hour, double day_end_hour) {
  log.validate();
  DiscomfortBreakdown d;
  int count = 0;
  for (int k = 0; k < kStepsPerDay; ++k) {
    const double hr = hour_of_step(k);
    if (hr < day_start_hour || hr >= day_end_hour) continue;
    const double y = log.zone_temp[static_cast<std::size_t>(k)];
    d.ppd_mean += ppd(pmv(y));
    d.t_ave += y;
    ++count;
  }
  if (count == 0) throw ConfigError("discomfort: empty daytime window");
  d.ppd_mean /= count;
  d.t_ave /= count;
  d.t_env = weather.mean_outdoor();
  const double off = d.t_ave - (d.t_env + 20.0);
  d.adaptive = 100.0 * off * off;
  return d;
}

double discomfort(const TrajectoryLog& log, const WeatherDay& weather,
                  double day_start_hour, double day_end_hour) {
  return discomfort_breakdown(log, weather, day_start_hour, day_end_hour).total();
}

DayResult evaluate_day(const TrajectoryLog& log, const WeatherDay& weather,
                       const OccupantConfig& cfg) {
  cfg.validate();
  const DiscomfortBreakdown d =
      discomfort_breakdown(log, weather, cfg.day_start_hour, cfg.day_end_hour);
  DayResult r;
  r.day = log.day;
  r.cost = energy_cost(log);
  r.discomfort = d.total();
  r.t_ave = d.t_ave;
  r.t_env = d.t_env;
  r.utility = cfg.kind == OccupantKind::energy ? -r.cost : -r.discomfort;
  return r;
}

int preference_feedback(double j_now, double j_prev, const OccupantConfig& cfg,
                        RandomStream& rng) {
  if (cfg.feedback == FeedbackMode::deterministic) return j_now >= j_prev ? 1 : 0;
  cfg.validate();
  return rng.bernoulli(sigmoid((j_now - j_prev) / cfg.utility_scale)) ? 1 : 0;
}

}  // namespace cpbo
