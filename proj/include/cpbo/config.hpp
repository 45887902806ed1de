#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cpbo/mpc.hpp"
#include "cpbo/occupants.hpp"
#include "cpbo/plant.hpp"
#include "cpbo/tuner.hpp"
#include "cpbo/weather.hpp"

namespace cpbo {

enum class Method { baseline, static_pbo, contextual_pbo };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct IdentificationConfig {
  double ridge = 1e-3;
  double excitation_lower = 19.0;  // °C
  double excitation_upper = 24.0;
  int start_day = 35;
  int excitation_days = 7;
  int validation_days = 14;  // held-out baseline days after the excitation
  int warmup_days = 3;       // baseline days before the excitation
  double initial_zone_temp = 20.0;
  double initial_wall_temp = 15.0;
};

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
  int days = 60;
  std::vector<Method> methods{Method::baseline, Method::static_pbo,
                              Method::contextual_pbo};
  OccupantConfig occupant = OccupantConfig::for_kind(OccupantKind::comfort);
  TunerConfig tuner;
  IdentificationConfig identification;
  MpcConfig mpc;
  RcParams plant;
  BaselineController::Settings baseline;
  WeatherConfig weather;
  int theta2_curve_points = 21;
  bool write_trajectories = true;
  std::filesystem::path output_dir = "out";

  // First day of tuning (the day after the seed day).
  int seed_day() const {
    return identification.start_day + identification.excitation_days;
  }
  int first_tuning_day() const { return seed_day() + 1; }
  void validate() const;
};

// JSON round trip. Missing keys keep their defaults; unknown keys are errors.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

}  // namespace cpbo
