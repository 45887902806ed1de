#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpbo/rng.hpp"

namespace cpbo {

inline constexpr int kArxOrder = 10;
inline constexpr int kArxInputs = 3;

// Input channels in model order.
enum class InputChannel { valve = 0, outdoor = 1, solar = 2 };

inline const std::array<std::string, kArxInputs> kInputNames{"valve", "outdoor",
                                                           "solar"};

// Aligned measurement series: y[k] is the zone temperature at the start of
// step k, u[i][k] the input i applied during step k.
struct IoSeries {
  std::vector<double> y;
  std::array<std::vector<double>, kArxInputs> u;

  std::size_t size() const { return y.size(); }
  void push_back(double yk, const std::array<double, kArxInputs>& uk);
  void append(const IoSeries& other);
  void validate() const;
};

// The most recent kArxOrder samples, oldest first (column/index 9 is time k).
struct IoWindow {
  Eigen::Matrix<double, kArxOrder, 1> y;
  Eigen::Matrix<double, kArxInputs, kArxOrder> u;
};

// Window ending at sample k (needs k ≥ kArxOrder − 1).
IoWindow window_at(const IoSeries& s, std::size_t k);

struct ChannelStats {
  double mean = 0.0;
  double scale = 1.0;

  double normalize(double v) const { return (v - mean) / scale; }
  double denormalize(double v) const { return mean + scale * v; }
};

// y_{k+1} = Σ_j a_j y_{k−9+j} + Σ_i Σ_j b_{ij} u_{i,k−9+j}, all in
// normalized coordinates (index 9 multiplies the time-k sample).
struct ArxModel {
  Eigen::Matrix<double, kArxOrder, 1> a;
  Eigen::Matrix<double, kArxInputs, kArxOrder> b;
  ChannelStats y_stats;
  std::array<ChannelStats, kArxInputs> u_stats;
  double ridge = 0.0;
  std::size_t training_rows = 0;
  double training_mae = 0.0;            // open-loop over the training series, °C
  double training_one_step_rmse = 0.0;  // °C
};

// Randomized bang-bang excitation: off above `upper`, on below `lower`,
// fair coin in between.
int excitation_control(double y, double lower, double upper, RandomStream& rng);

// Ridge least squares in normalized coordinates. Needs at least
// kArxOrder + 40 samples; throws IdentificationError naming a constant
// channel.
ArxModel fit_arx(const IoSeries& history, double ridge);

double predict_one_step(const ArxModel& m, const IoWindow& w);

// Recursive prediction y_{k+1..k+H}. Column 0 of `future_inputs` replaces
// the time-k inputs of the window; column h supplies time k+h.
std::vector<double> rollout_open_loop(const ArxModel& m, IoWindow w0,
                                      const Eigen::Matrix<double, kArxInputs,
                                                          Eigen::Dynamic>&
                                          future_inputs);

// One-step residuals y_{k+1} − ŷ_{k+1} over all regression rows of `s`.
std::vector<double> one_step_residuals(const ArxModel& m, const IoSeries& s);

// Open-loop simulation over the whole series from its first window, driven
// by the measured inputs; returns the mean absolute error in °C.
double open_loop_mae(const ArxModel& m, const IoSeries& s);

void write_model(std::ostream& out, const ArxModel& m);
ArxModel read_model(std::istream& in);

}  // namespace cpbo
