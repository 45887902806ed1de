#include "cpbo/weather.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "cpbo/errors.hpp"
#include "cpbo/rng.hpp"

namespace cpbo {

void WeatherConfig::validate() const {
  if (!(context_min < context_max)) throw ConfigError("weather: empty context range");
  if (!(price_min < price_max)) throw ConfigError("weather: empty price range");
  if (!(sunrise_hour < sunset_hour)) throw ConfigError("weather: sunset before sunrise");
  if (std::abs(anomaly_persistence) >= 1.0 || std::abs(noise_persistence) >= 1.0)
    throw ConfigError("weather: AR(1) persistence must lie in (-1, 1)");
  if (!(cloud_min >= 0.0 && cloud_min <= 1.0))
    throw ConfigError("weather: cloud_min must lie in [0, 1]");
}

double WeatherDay::mean_outdoor() const {
  double s = 0.0;
  for (double v : outdoor) s += v;
  return s / static_cast<double>(outdoor.size());
}

namespace {

// Day-level anomaly: AR(1) chain started from its stationary law at day 0,
// each innovation drawn from its own (seed, day) stream.
double daily_anomaly(std::uint64_t seed, int day, const WeatherConfig& cfg) {
  const double phi = cfg.anomaly_persistence;
  RandomStream r0(seed, "weather-anomaly", {0});
  double a = cfg.anomaly_sd / std::sqrt(1.0 - phi * phi) * r0.normal();
  for (int d = 1; d <= day; ++d) {
    RandomStream r(seed, "weather-anomaly", {static_cast<std::uint64_t>(d)});
    a = phi * a + cfg.anomaly_sd * r.normal();
  }
  return a;
}

}  // namespace

WeatherDay generate_weather(std::uint64_t seed, int day, const WeatherConfig& cfg) {
  if (day < 0) throw ConfigError("weather: day index must be >= 0");
  cfg.validate();
  WeatherDay w;
  w.day = day;
  w.outdoor.resize(kStepsPerDay);
  w.solar.resize(kStepsPerDay);
  w.price.resize(kStepsPerDay);
  const auto d = static_cast<std::uint64_t>(day);

  const double anomaly = daily_anomaly(seed, day, cfg);
  RandomStream noise_rng(seed, "weather-noise", {d});
  const double phi = cfg.noise_persistence;
  double e = cfg.noise_sd / std::sqrt(1.0 - phi * phi) * noise_rng.normal();
  for (int k = 0; k < kStepsPerDay; ++k) {
    const double t = day + hour_of_step(k) / 24.0;
    const double season =
        cfg.season_anchor_temp + cfg.season_slope * (t - cfg.season_anchor_day);
    const double diurnal = cfg.diurnal_amplitude *
                           std::sin(2.0 * std::numbers::pi * (hour_of_step(k) - 9.0) / 24.0);
    w.outdoor[k] = season + diurnal + anomaly + e;
    e = phi * e + cfg.noise_sd * noise_rng.normal();
  }
  // Keep the daily mean inside the context range by shifting the whole day.
  const double mean = w.mean_outdoor();
  const double clamped = std::clamp(mean, cfg.context_min, cfg.context_max);
  if (clamped != mean)
    for (double& v : w.outdoor) v += clamped - mean;

  RandomStream solar_rng(seed, "weather-solar", {d});
  const double cloud = solar_rng.uniform(cfg.cloud_min, 1.0);
  const double peak = std::max(
      0.0, cfg.solar_peak + cfg.solar_peak_slope * (day - cfg.season_anchor_day));
  for (int k = 0; k < kStepsPerDay; ++k) {
    // Irradiance at the middle of the step.
    const double hr = hour_of_step(k) + 0.5 * kStepHours;
    double v = 0.0;
    if (hr > cfg.sunrise_hour && hr < cfg.sunset_hour) {
      const double phase = (hr - cfg.sunrise_hour) / (cfg.sunset_hour - cfg.sunrise_hour);
      const double flicker = solar_rng.uniform(0.85, 1.0);
      v = peak * cloud * flicker * std::sin(std::numbers::pi * phase);
    }
    w.solar[k] = std::max(0.0, v);
  }

  RandomStream price_rng(seed, "weather-price", {d});
  const double range = cfg.price_max - cfg.price_min;
  const double morning = price_rng.uniform(cfg.peak_level_min, 1.0);
  const double evening = price_rng.uniform(cfg.peak_level_min, 1.0);
  const double shoulder = price_rng.uniform(0.0, cfg.shoulder_level_max);
  for (int k = 0; k < kStepsPerDay; ++k) {
    const double hr = hour_of_step(k);
    double level = 0.0;
    if (hr >= 7.0 && hr < 10.0)
      level = morning;
    else if (hr >= 17.0 && hr < 20.0)
      level = evening;
    else if (hr >= 10.0 && hr < 17.0)
      level = shoulder;
    const double p =
        cfg.price_min + level * range + price_rng.uniform(0.0, cfg.price_jitter);
    w.price[k] = std::clamp(p, cfg.price_min, cfg.price_max);
  }
  return w;
}

std::uint64_t weather_hash(const WeatherDay& w) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFFu;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(w.day));
  for (const auto* trace : {&w.outdoor, &w.solar, &w.price})
    for (double v : *trace) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

WeatherSource::WeatherSource(std::uint64_t seed, WeatherConfig cfg)
    : seed_(seed), cfg_(std::move(cfg)) {
  cfg_.validate();
}

const WeatherDay& WeatherSource::day(int d) const {
  auto it = cache_.find(d);
  if (it == cache_.end()) it = cache_.emplace(d, generate_weather(seed_, d, cfg_)).first;
  return it->second;
}

namespace {

std::pair<int, int> split_step(long long abs_step) {
  if (abs_step < 0) throw ConfigError("weather: negative step index");
  return {static_cast<int>(abs_step / kStepsPerDay),
          static_cast<int>(abs_step % kStepsPerDay)};
}

}  // namespace

double WeatherSource::outdoor_at(long long abs_step) const {
  const auto [d, k] = split_step(abs_step);
  return day(d).outdoor[static_cast<std::size_t>(k)];
}

double WeatherSource::solar_at(long long abs_step) const {
  const auto [d, k] = split_step(abs_step);
  return day(d).solar[static_cast<std::size_t>(k)];
}

double WeatherSource::price_at(long long abs_step) const {
  const auto [d, k] = split_step(abs_step);
  return day(d).price[static_cast<std::size_t>(k)];
}

}  // namespace cpbo
