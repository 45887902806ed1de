#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpbo/arx.hpp"
#include "cpbo/config.hpp"
#include "cpbo/errors.hpp"
#include "cpbo/occupants.hpp"
#include "cpbo/plant.hpp"
#include "cpbo/tuner.hpp"
#include "cpbo/weather.hpp"

namespace cpbo {

// A module failure annotated with the run coordinates it happened at.
class RunError : public Error {
 public:
  RunError(const std::string& what, std::string method, std::uint64_t seed, int day)
      : Error(what), method_(std::move(method)), seed_(seed), day_(day) {}
  const std::string& method() const { return method_; }
  std::uint64_t seed() const { return seed_; }
  int day() const { return day_; }

 private:
  std::string method_;
  std::uint64_t seed_;
  int day_;
};

struct MetricSeries {
  std::vector<double> j;      // per-day utility
  std::vector<double> r_sum;  // cumulative
  std::vector<double> r_ave;  // running average
};

MetricSeries compute_metrics(std::span<const double> j);

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

struct IdentificationResult {
  std::uint64_t seed = 0;
  ArxModel model;
  double validation_mae = 0.0;  // open-loop, held-out baseline days
  PlantState start;             // plant state on the morning of the seed day
  IoSeries history;             // excitation-week samples preceding the seed day
};

IdentificationResult run_identification_phase(const ExperimentConfig& cfg,
                                              std::uint64_t seed);

// One day of one (method, seed) cell. t = 0 is the seed day.
struct DayRecord {
  int t = 0;
  int day = 0;
  ParamPoint theta;  // zeros for the baseline
  double z = 0.0;
  DayResult result;
  int feedback = -1;  // -1 when no comparison was made
  std::uint64_t weather_hash = 0;
};

struct CellResult {
  Method method = Method::baseline;
  std::uint64_t seed = 0;
  std::vector<DayRecord> days;        // seed day first
  std::vector<double> theta2_curve;   // empty for the baseline
  std::vector<double> tuning_utilities() const;
  MetricSeries metrics() const { return compute_metrics(tuning_utilities()); }
};

// Returns the preferred-day outcome for (today, yesterday).
using FeedbackCallback = std::function<int(const DayRecord& today, const DayRecord& yesterday)>;

struct RunOptions {
  bool resume = false;
  // Stop after this tuning day as if interrupted (checkpoints remain).
  std::optional<int> stop_after;
  FeedbackCallback feedback;  // overrides the synthetic occupant when set
  std::function<void(const std::string&)> log;
};

// z values at which θ₂* curves are sampled.
std::vector<double> theta2_curve_grid(const ExperimentConfig& cfg);

// Runs the seed day and the tuning days of one cell. Writes checkpoints and,
// when enabled, trajectory tables below cfg.output_dir.
CellResult run_cell(const ExperimentConfig& cfg, const IdentificationResult& id,
                    Method method, const RunOptions& options = {});

// Rebuilds the tuner from a finished cell and samples θ₂*(z).
std::vector<double> compute_theta2_curve(const ExperimentConfig& cfg, const CellResult& cell);

struct ExperimentResult {
  ExperimentConfig config;
  std::map<std::uint64_t, IdentificationResult> identification;
  std::vector<CellResult> cells;  // ordered by seed, then method

  const CellResult* find(Method m, std::uint64_t seed) const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {},
                                std::map<std::uint64_t, IdentificationResult>* cache = nullptr);

// True when every method of a seed saw bit-identical weather on each day.
bool weather_paired(const ExperimentResult& r);

struct ImprovementRow {
  Method method = Method::static_pbo;
  std::uint64_t seed = 0;
  double r_sum = 0.0;
  double r_sum_baseline = 0.0;
  double improvement = 0.0;  // (R − R_base) / |R_base|
};

std::vector<ImprovementRow> relative_improvements(const ExperimentResult& r);

struct ImprovementSummary {
  Method method = Method::static_pbo;
  std::size_t count = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr() const { return q75 - q25; }
};

std::vector<ImprovementSummary> summarize_improvements(const std::vector<ImprovementRow>& rows);

// Files under the run directory.
std::filesystem::path cell_stem(Method m, std::uint64_t seed);
std::filesystem::path checkpoint_dir(const ExperimentConfig& cfg, Method m, std::uint64_t seed);

}  // namespace cpbo
