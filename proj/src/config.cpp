#include "cpbo/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

#include <json.hpp>

#include "cpbo/errors.hpp"
#include "cpbo/table_io.hpp"

namespace cpbo {

using nlohmann::ordered_json;

std::string to_string(Method m) {
  switch (m) {
    case Method::baseline: return "baseline";
    case Method::static_pbo: return "static";
    case Method::contextual_pbo: return "contextual";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "baseline") return Method::baseline;
  if (s == "static") return Method::static_pbo;
  if (s == "contextual") return Method::contextual_pbo;
  throw ConfigError("unknown method '" + s + "' (expected baseline, static or contextual)");
}

void ExperimentConfig::validate() const {
  if (days < 1) throw ConfigError("config: days must be >= 1");
  if (seeds.empty()) throw ConfigError("config: at least one seed is required");
  if (methods.empty()) throw ConfigError("config: at least one method is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("config: duplicate seeds");
  if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size())
    throw ConfigError("config: duplicate methods");
  occupant.validate();
  tuner.validate();
  mpc.validate();
  plant.validate();
  weather.validate();
  const IdentificationConfig& id = identification;
  if (!(id.ridge > 0.0)) throw ConfigError("identification: ridge must be > 0");
  if (!(id.excitation_lower < id.excitation_upper))
    throw ConfigError("identification: excitation band is empty");
  if (id.excitation_days < 1 || id.validation_days < 1 || id.warmup_days < 0)
    throw ConfigError("identification: day counts must be positive");
  if (id.start_day - id.warmup_days < 0)
    throw ConfigError("identification: warm-up starts before day 0");
  if (mpc.step_seconds != kStepSeconds)
    throw ConfigError("mpc: step must equal the 900 s plant step");
  if (mpc.heater_kw * 1000.0 != plant.heater_power)
    throw ConfigError("mpc heater_kw must match plant heater_power");
  if (theta2_curve_points < 2) throw ConfigError("config: theta2_curve_points must be >= 2");
}

namespace {

// Reads keys of one JSON object into fields and rejects unknown keys.
class Section {
 public:
  Section(const ordered_json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  const ordered_json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("config: unknown key '" + name_ + "." + k + "'");
  }

 private:
  const ordered_json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <class F>
void section(Section& parent, const char* key, const std::string& path, F&& f) {
  if (const ordered_json* c = parent.child(key)) {
    Section s(*c, path);
    f(s);
    s.finish();
  }
}

void read_domain(Section& s, Domain& d) {
  s.get("price_threshold_min", d.price_threshold_min);
  s.get("price_threshold_max", d.price_threshold_max);
  s.get("setpoint_min", d.setpoint_min);
  s.get("setpoint_max", d.setpoint_max);
  s.get("context_min", d.context_min);
  s.get("context_max", d.context_max);
}

ordered_json domain_json(const Domain& d) {
  return {{"price_threshold_min", d.price_threshold_min},
          {"price_threshold_max", d.price_threshold_max},
          {"setpoint_min", d.setpoint_min},
          {"setpoint_max", d.setpoint_max},
          {"context_min", d.context_min},
          {"context_max", d.context_max}};
}

void read_tuner(Section& s, TunerConfig& t) {
  section(s, "domain", "tuner.domain", [&](Section& c) { read_domain(c, t.domain); });
  section(s, "kernel", "tuner.kernel", [&](Section& c) {
    c.get("lengthscales", t.kernel.lengthscales);
    c.get("jitter", t.kernel.jitter);
    c.get("contextual", t.kernel.contextual);
  });
  s.get("rkhs_bound", t.rkhs_bound);
  s.get("beta", t.beta);
  section(s, "beta_schedule", "tuner.beta_schedule", [&](Section& c) {
    std::string kind = t.beta_schedule.kind == BetaSchedule::Kind::fixed ? "fixed"
                                                                          : "logarithmic";
    c.get("kind", kind);
    if (kind == "fixed")
      t.beta_schedule.kind = BetaSchedule::Kind::fixed;
    else if (kind == "logarithmic")
      t.beta_schedule.kind = BetaSchedule::Kind::logarithmic;
    else
      throw ConfigError("config: beta_schedule.kind must be fixed or logarithmic");
    c.get("growth", t.beta_schedule.growth);
  });
  s.get("grid_price_steps", t.grid_price_steps);
  s.get("grid_setpoint_steps", t.grid_setpoint_steps);
  section(s, "seed_theta", "tuner.seed_theta", [&](Section& c) {
    c.get("price_threshold", t.seed_theta.price_threshold);
    c.get("lower_setpoint", t.seed_theta.lower_setpoint);
  });
  section(s, "solver", "tuner.solver", [&](Section& c) {
    c.get("tolerance", t.solver.tolerance);
    c.get("max_iterations", t.solver.max_iterations);
  });
}

ordered_json tuner_json(const TunerConfig& t) {
  return {
      {"domain", domain_json(t.domain)},
      {"kernel",
       {{"lengthscales", t.kernel.lengthscales},
        {"jitter", t.kernel.jitter},
        {"contextual", t.kernel.contextual}}},
      {"rkhs_bound", t.rkhs_bound},
      {"beta", t.beta},
      {"beta_schedule",
       {{"kind", t.beta_schedule.kind == BetaSchedule::Kind::fixed ? "fixed" : "logarithmic"},
        {"growth", t.beta_schedule.growth}}},
      {"grid_price_steps", t.grid_price_steps},
      {"grid_setpoint_steps", t.grid_setpoint_steps},
      {"seed_theta",
       {{"price_threshold", t.seed_theta.price_threshold},
        {"lower_setpoint", t.seed_theta.lower_setpoint}}},
      {"solver",
       {{"tolerance", t.solver.tolerance}, {"max_iterations", t.solver.max_iterations}}}};
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section root(j, "config");
  root.get("seeds", c.seeds);
  root.get("days", c.days);
  if (const ordered_json* m = root.child("methods")) {
    std::vector<std::string> names;
    try {
      names = m->get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: methods must be a list of names: ") + e.what());
    }
    c.methods.clear();
    for (const auto& n : names) c.methods.push_back(parse_method(n));
  }
  section(root, "occupant", "occupant", [&](Section& s) {
    std::string kind = to_string(c.occupant.kind);
    s.get("kind", kind);
    const FeedbackMode fb = c.occupant.feedback;
    c.occupant = OccupantConfig::for_kind(parse_occupant_kind(kind));
    c.occupant.feedback = fb;
    std::string feedback = to_string(c.occupant.feedback);
    s.get("feedback", feedback);
    c.occupant.feedback = parse_feedback_mode(feedback);
    s.get("utility_scale", c.occupant.utility_scale);
    s.get("day_start_hour", c.occupant.day_start_hour);
    s.get("day_end_hour", c.occupant.day_end_hour);
  });
  section(root, "tuner", "tuner", [&](Section& s) { read_tuner(s, c.tuner); });
  section(root, "identification", "identification", [&](Section& s) {
    IdentificationConfig& id = c.identification;
    s.get("ridge", id.ridge);
    s.get("excitation_lower", id.excitation_lower);
    s.get("excitation_upper", id.excitation_upper);
    s.get("start_day", id.start_day);
    s.get("excitation_days", id.excitation_days);
    s.get("validation_days", id.validation_days);
    s.get("warmup_days", id.warmup_days);
    s.get("initial_zone_temp", id.initial_zone_temp);
    s.get("initial_wall_temp", id.initial_wall_temp);
  });
  section(root, "mpc", "mpc", [&](Section& s) {
    MpcConfig& m = c.mpc;
    s.get("horizon", m.horizon);
    s.get("step_seconds", m.step_seconds);
    s.get("slack_weight", m.slack_weight);
    s.get("upper_bound", m.upper_bound);
    s.get("high_price_lower", m.high_price_lower);
    s.get("night_lower", m.night_lower);
    s.get("day_start_hour", m.day_start_hour);
    s.get("day_end_hour", m.day_end_hour);
    s.get("heater_kw", m.heater_kw);
  });
  section(root, "plant", "plant", [&](Section& s) {
    RcParams& p = c.plant;
    s.get("zone_capacity", p.zone_capacity);
    s.get("wall_capacity", p.wall_capacity);
    s.get("r_zone_wall", p.r_zone_wall);
    s.get("r_wall_out", p.r_wall_out);
    s.get("solar_gain_area", p.solar_gain_area);
    s.get("heater_power", p.heater_power);
    s.get("substep", p.substep);
    s.get("temp_min", p.temp_min);
    s.get("temp_max", p.temp_max);
  });
  section(root, "baseline", "baseline", [&](Section& s) {
    auto& b = c.baseline;
    s.get("day_setpoint", b.day_setpoint);
    s.get("night_setpoint", b.night_setpoint);
    s.get("band", b.band);
    s.get("day_start_hour", b.day_start_hour);
    s.get("day_end_hour", b.day_end_hour);
  });
  section(root, "weather", "weather", [&](Section& s) {
    WeatherConfig& w = c.weather;
    s.get("season_anchor_day", w.season_anchor_day);
    s.get("season_anchor_temp", w.season_anchor_temp);
    s.get("season_slope", w.season_slope);
    s.get("diurnal_amplitude", w.diurnal_amplitude);
    s.get("anomaly_persistence", w.anomaly_persistence);
    s.get("anomaly_sd", w.anomaly_sd);
    s.get("noise_persistence", w.noise_persistence);
    s.get("noise_sd", w.noise_sd);
    s.get("context_min", w.context_min);
    s.get("context_max", w.context_max);
    s.get("sunrise_hour", w.sunrise_hour);
    s.get("sunset_hour", w.sunset_hour);
    s.get("solar_peak", w.solar_peak);
    s.get("solar_peak_slope", w.solar_peak_slope);
    s.get("cloud_min", w.cloud_min);
    s.get("price_min", w.price_min);
    s.get("price_max", w.price_max);
    s.get("peak_level_min", w.peak_level_min);
    s.get("shoulder_level_max", w.shoulder_level_max);
    s.get("price_jitter", w.price_jitter);
  });
  root.get("theta2_curve_points", c.theta2_curve_points);
  root.get("write_trajectories", c.write_trajectories);
  std::string out = c.output_dir.string();
  root.get("output_dir", out);
  c.output_dir = out;
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json_text(read_text_file(path));
}

std::string config_to_json_text(const ExperimentConfig& c) {
  ordered_json j;
  j["seeds"] = c.seeds;
  j["days"] = c.days;
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["occupant"] = {{"kind", to_string(c.occupant.kind)},
                   {"feedback", to_string(c.occupant.feedback)},
                   {"utility_scale", c.occupant.utility_scale},
                   {"day_start_hour", c.occupant.day_start_hour},
                   {"day_end_hour", c.occupant.day_end_hour}};
  j["tuner"] = tuner_json(c.tuner);
  const IdentificationConfig& id = c.identification;
  j["identification"] = {{"ridge", id.ridge},
                         {"excitation_lower", id.excitation_lower},
                         {"excitation_upper", id.excitation_upper},
                         {"start_day", id.start_day},
                         {"excitation_days", id.excitation_days},
                         {"validation_days", id.validation_days},
                         {"warmup_days", id.warmup_days},
                         {"initial_zone_temp", id.initial_zone_temp},
                         {"initial_wall_temp", id.initial_wall_temp}};
  const MpcConfig& m = c.mpc;
  j["mpc"] = {{"horizon", m.horizon},
              {"step_seconds", m.step_seconds},
              {"slack_weight", m.slack_weight},
              {"upper_bound", m.upper_bound},
              {"high_price_lower", m.high_price_lower},
              {"night_lower", m.night_lower},
              {"day_start_hour", m.day_start_hour},
              {"day_end_hour", m.day_end_hour},
              {"heater_kw", m.heater_kw}};
  const RcParams& p = c.plant;
  j["plant"] = {{"zone_capacity", p.zone_capacity},
                {"wall_capacity", p.wall_capacity},
                {"r_zone_wall", p.r_zone_wall},
                {"r_wall_out", p.r_wall_out},
                {"solar_gain_area", p.solar_gain_area},
                {"heater_power", p.heater_power},
                {"substep", p.substep},
                {"temp_min", p.temp_min},
                {"temp_max", p.temp_max}};
  const auto& b = c.baseline;
  j["baseline"] = {{"day_setpoint", b.day_setpoint},
                   {"night_setpoint", b.night_setpoint},
                   {"band", b.band},
                   {"day_start_hour", b.day_start_hour},
                   {"day_end_hour", b.day_end_hour}};
  const WeatherConfig& w = c.weather;
  j["weather"] = {{"season_anchor_day", w.season_anchor_day},
                  {"season_anchor_temp", w.season_anchor_temp},
                  {"season_slope", w.season_slope},
                  {"diurnal_amplitude", w.diurnal_amplitude},
                  {"anomaly_persistence", w.anomaly_persistence},
                  {"anomaly_sd", w.anomaly_sd},
                  {"noise_persistence", w.noise_persistence},
                  {"noise_sd", w.noise_sd},
                  {"context_min", w.context_min},
                  {"context_max", w.context_max},
                  {"sunrise_hour", w.sunrise_hour},
                  {"sunset_hour", w.sunset_hour},
                  {"solar_peak", w.solar_peak},
                  {"solar_peak_slope", w.solar_peak_slope},
                  {"cloud_min", w.cloud_min},
                  {"price_min", w.price_min},
                  {"price_max", w.price_max},
                  {"peak_level_min", w.peak_level_min},
                  {"shoulder_level_max", w.shoulder_level_max},
                  {"price_jitter", w.price_jitter}};
  j["theta2_curve_points"] = c.theta2_curve_points;
  j["write_trajectories"] = c.write_trajectories;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2) + "\n";
}

}  // namespace cpbo
