#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace cpbo {

inline constexpr int kStepsPerDay = 96;
inline constexpr double kStepSeconds = 900.0;
inline constexpr double kStepHours = kStepSeconds / 3600.0;

inline double hour_of_step(int step) { return step * kStepHours; }

struct WeatherConfig {
  // Outdoor temperature: seasonal ramp + diurnal sinusoid + day-level AR(1)
  // anomaly + step-level AR(1) noise.
  double season_anchor_day = 35.0;
  double season_anchor_temp = -5.0;  // °C
  double season_slope = 0.15;        // °C/day
  double diurnal_amplitude = 3.0;    // °C, peak at 15:00
  double anomaly_persistence = 0.7;
  double anomaly_sd = 1.5;           // °C innovation
  double noise_persistence = 0.9;
  double noise_sd = 0.2;             // °C innovation
  double context_min = -10.0;
  double context_max = 10.0;

  // Solar: half-sine between sunrise and sunset scaled by daily cloudiness.
  double sunrise_hour = 7.0;
  double sunset_hour = 18.0;
  double solar_peak = 450.0;          // W/m² on a clear day at the anchor
  double solar_peak_slope = 2.0;      // W/m² per day
  double cloud_min = 0.2;             // cloudiness factor drawn in [cloud_min, 1]

  // Price: off-peak base, on-peak windows 07–10 and 17–20, a daytime
  // shoulder in between, plus nonnegative jitter.
  double price_min = 0.0889;
  double price_max = 0.1019;
  double peak_level_min = 0.6;        // fraction of the price range
  double shoulder_level_max = 0.5;
  double price_jitter = 0.0015;       // EUR/kWh

  void validate() const;
};

struct WeatherDay {
  int day = 0;
  std::vector<double> outdoor;  // °C, per step
  std::vector<double> solar;    // W/m²
  std::vector<double> price;    // EUR/kWh

  double mean_outdoor() const;
};

// Deterministic in (seed, day); independent of any other call.
WeatherDay generate_weather(std::uint64_t seed, int day, const WeatherConfig& cfg = {});

// 64-bit FNV-1a over the exact bit patterns of all three traces.
std::uint64_t weather_hash(const WeatherDay& w);

// Per-run cache so controllers can read ahead across day boundaries.
class WeatherSource {
 public:
  WeatherSource(std::uint64_t seed, WeatherConfig cfg);

  const WeatherDay& day(int d) const;
  std::uint64_t seed() const { return seed_; }
  const WeatherConfig& config() const { return cfg_; }

  // Values at absolute step index day*96 + step.
  double outdoor_at(long long abs_step) const;
  double solar_at(long long abs_step) const;
  double price_at(long long abs_step) const;

 private:
  std::uint64_t seed_;
  WeatherConfig cfg_;
  mutable std::map<int, WeatherDay> cache_;
};

}  // namespace cpbo
