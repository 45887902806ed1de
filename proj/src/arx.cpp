#include "cpbo/arx.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cpbo/errors.hpp"
#include "cpbo/table_io.hpp"

namespace cpbo {

void IoSeries::push_back(double yk, const std::array<double, kArxInputs>& uk) {
  y.push_back(yk);
  for (int i = 0; i < kArxInputs; ++i) u[i].push_back(uk[i]);
}

void IoSeries::append(const IoSeries& other) {
  y.insert(y.end(), other.y.begin(), other.y.end());
  for (int i = 0; i < kArxInputs; ++i)
    u[i].insert(u[i].end(), other.u[i].begin(), other.u[i].end());
}

void IoSeries::validate() const {
  for (int i = 0; i < kArxInputs; ++i)
    if (u[i].size() != y.size())
      throw DimensionError("io series: channel '" + kInputNames[i] +
                           "' is not aligned with the output");
}

IoWindow window_at(const IoSeries& s, std::size_t k) {
  s.validate();
  if (k + 1 < kArxOrder || k >= s.size())
    throw DimensionError("io series: incomplete window at sample " +
                         std::to_string(k));
  IoWindow w;
  const std::size_t first = k + 1 - kArxOrder;
  for (int j = 0; j < kArxOrder; ++j) {
    w.y[j] = s.y[first + j];
    for (int i = 0; i < kArxInputs; ++i) w.u(i, j) = s.u[i][first + j];
  }
  return w;
}

int excitation_control(double y, double lower, double upper, RandomStream& rng) {
  if (y > upper) return 0;
  if (y < lower) return 1;
  return rng.bernoulli(0.5) ? 1 : 0;
}

namespace {

ChannelStats channel_stats(const std::vector<double>& v, const std::string& name) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12 * (1.0 + std::abs(mean))))
    throw IdentificationError("fit_arx: channel '" + name + "' is constant");
  return {mean, sd};
}

double normalized_prediction(const ArxModel& m,
                             const Eigen::Matrix<double, kArxOrder, 1>& yn,
                             const Eigen::Matrix<double, kArxInputs, kArxOrder>& un) {
  return m.a.dot(yn) + (m.b.cwiseProduct(un)).sum();
}

Eigen::Matrix<double, kArxOrder, 1> normalized_y(const ArxModel& m,
                                                  const IoWindow& w) {
  Eigen::Matrix<double, kArxOrder, 1> yn;
  for (int j = 0; j < kArxOrder; ++j) yn[j] = m.y_stats.normalize(w.y[j]);
  return yn;
}

Eigen::Matrix<double, kArxInputs, kArxOrder> normalized_u(const ArxModel& m,
                                                           const IoWindow& w) {
  Eigen::Matrix<double, kArxInputs, kArxOrder> un;
  for (int i = 0; i < kArxInputs; ++i)
    for (int j = 0; j < kArxOrder; ++j) un(i, j) = m.u_stats[i].normalize(w.u(i, j));
  return un;
}

}  // namespace

ArxModel fit_arx(const IoSeries& history, double ridge) {
  history.validate();
  if (!(ridge >= 0.0)) throw ConfigError("fit_arx: ridge must be >= 0");
  const std::size_t n = history.size();
  if (n < static_cast<std::size_t>(kArxOrder + 40))
    throw InsufficientDataError("fit_arx: need at least " +
                                std::to_string(kArxOrder + 40) + " samples, got " +
                                std::to_string(n));
  ArxModel m;
  m.ridge = ridge;
  m.y_stats = channel_stats(history.y, "zone_temp");
  for (int i = 0; i < kArxInputs; ++i)
    m.u_stats[i] = channel_stats(history.u[i], kInputNames[i]);

  constexpr int p = kArxOrder * (1 + kArxInputs);
  const Eigen::Index rows = static_cast<Eigen::Index>(n - kArxOrder);
  // Ridge as extra rows under the data block keeps the solve in QR form.
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rows + p, p);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(rows + p);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t k = static_cast<std::size_t>(r) + kArxOrder - 1;
    const std::size_t first = k + 1 - kArxOrder;
    for (int j = 0; j < kArxOrder; ++j) {
      X(r, j) = m.y_stats.normalize(history.y[first + j]);
      for (int i = 0; i < kArxInputs; ++i)
        X(r, kArxOrder * (1 + i) + j) = m.u_stats[i].normalize(history.u[i][first + j]);
    }
    target[r] = m.y_stats.normalize(history.y[k + 1]);
  }
  X.bottomRows(p).diagonal().setConstant(std::sqrt(ridge));
  const Eigen::VectorXd theta = X.colPivHouseholderQr().solve(target);
  if (!theta.allFinite())
    throw IdentificationError("fit_arx: least-squares solve failed");
  m.a = theta.head(kArxOrder);
  for (int i = 0; i < kArxInputs; ++i)
    m.b.row(i) = theta.segment(kArxOrder * (1 + i), kArxOrder).transpose();
  m.training_rows = static_cast<std::size_t>(rows);

  const std::vector<double> res = one_step_residuals(m, history);
  double ss = 0.0;
  for (double e : res) ss += e * e;
  m.training_one_step_rmse = std::sqrt(ss / static_cast<double>(res.size()));
  m.training_mae = open_loop_mae(m, history);
  return m;
}

double predict_one_step(const ArxModel& m, const IoWindow& w) {
  if (!w.y.allFinite() || !w.u.allFinite())
    throw DimensionError("predict_one_step: incomplete window");
  return m.y_stats.denormalize(normalized_prediction(m, normalized_y(m, w),
                                                     normalized_u(m, w)));
}

std::vector<double> rollout_open_loop(
    const ArxModel& m, IoWindow w0,
    const Eigen::Matrix<double, kArxInputs, Eigen::Dynamic>& future_inputs) {
  const Eigen::Index H = future_inputs.cols();
  if (H < 1) throw DimensionError("rollout_open_loop: horizon must be >= 1");
  w0.u.col(kArxOrder - 1) = future_inputs.col(0);
  Eigen::Matrix<double, kArxOrder, 1> yn = normalized_y(m, w0);
  Eigen::Matrix<double, kArxInputs, kArxOrder> un = normalized_u(m, w0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(H));
  for (Eigen::Index h = 0; h < H; ++h) {
    const double next = normalized_prediction(m, yn, un);
    out.push_back(m.y_stats.denormalize(next));
    if (h + 1 == H) break;
    for (int j = 0; j + 1 < kArxOrder; ++j) {
      yn[j] = yn[j + 1];
      un.col(j) = un.col(j + 1);
    }
    yn[kArxOrder - 1] = next;
    for (int i = 0; i < kArxInputs; ++i)
      un(i, kArxOrder - 1) = m.u_stats[i].normalize(future_inputs(i, h + 1));
  }
  return out;
}

std::vector<double> one_step_residuals(const ArxModel& m, const IoSeries& s) {
  s.validate();
  std::vector<double> out;
  for (std::size_t k = kArxOrder - 1; k + 1 < s.size(); ++k)
    out.push_back(s.y[k + 1] - predict_one_step(m, window_at(s, k)));
  return out;
}

double open_loop_mae(const ArxModel& m, const IoSeries& s) {
  s.validate();
  if (s.size() < static_cast<std::size_t>(kArxOrder) + 1)
    throw InsufficientDataError("open_loop_mae: series shorter than one window");
  const std::size_t k0 = kArxOrder - 1;
  const Eigen::Index H = static_cast<Eigen::Index>(s.size() - 1 - k0);
  Eigen::Matrix<double, kArxInputs, Eigen::Dynamic> inputs(kArxInputs, H);
  for (Eigen::Index h = 0; h < H; ++h)
    for (int i = 0; i < kArxInputs; ++i)
      inputs(i, h) = s.u[i][k0 + static_cast<std::size_t>(h)];
  const std::vector<double> pred = rollout_open_loop(m, window_at(s, k0), inputs);
  double sum = 0.0;
  for (Eigen::Index h = 0; h < H; ++h)
    sum += std::abs(pred[static_cast<std::size_t>(h)] -
                    s.y[k0 + 1 + static_cast<std::size_t>(h)]);
  return sum / static_cast<double>(H);
}

void write_model(std::ostream& out, const ArxModel& m) {
  out << "arx " << kArxOrder << ' ' << kArxInputs << '\n';
  out << "ridge " << format_double(m.ridge) << '\n';
  out << "training_rows " << m.training_rows << '\n';
  out << "training_mae " << format_double(m.training_mae) << '\n';
  out << "training_one_step_rmse " << format_double(m.training_one_step_rmse)
      << '\n';
  out << "stats zone_temp " << format_double(m.y_stats.mean) << ' '
      << format_double(m.y_stats.scale) << '\n';
  for (int i = 0; i < kArxInputs; ++i)
    out << "stats " << kInputNames[i] << ' ' << format_double(m.u_stats[i].mean)
        << ' ' << format_double(m.u_stats[i].scale) << '\n';
  out << "a";
  for (int j = 0; j < kArxOrder; ++j) out << ' ' << format_double(m.a[j]);
  out << '\n';
  for (int i = 0; i < kArxInputs; ++i) {
    out << "b " << kInputNames[i];
    for (int j = 0; j < kArxOrder; ++j) out << ' ' << format_double(m.b(i, j));
    out << '\n';
  }
}

ArxModel read_model(std::istream& in) {
  ArxModel m;
  std::string line;
  auto next = [&](std::string_view key, std::size_t width) {
    if (!std::getline(in, line))
      throw IoError("arx model: missing '" + std::string(key) + "' line");
    auto f = split_fields(line);
    if (f.empty() || f[0] != key || f.size() != width)
      throw IoError("arx model: malformed line '" + line + "'");
    return f;
  };
  auto head = next("arx", 3);
  if (parse_int(head[1]) != kArxOrder || parse_int(head[2]) != kArxInputs)
    throw IoError("arx model: unsupported order");
  m.ridge = parse_double(next("ridge", 2)[1]);
  m.training_rows = static_cast<std::size_t>(parse_int(next("training_rows", 2)[1]));
  m.training_mae = parse_double(next("training_mae", 2)[1]);
  m.training_one_step_rmse = parse_double(next("training_one_step_rmse", 2)[1]);
  auto stats = [&](const std::string& name) {
    auto f = next("stats", 4);
    if (f[1] != name) throw IoError("arx model: expected stats for '" + name + "'");
    return ChannelStats{parse_double(f[2]), parse_double(f[3])};
  };
  m.y_stats = stats("zone_temp");
  for (int i = 0; i < kArxInputs; ++i) m.u_stats[i] = stats(kInputNames[i]);
  auto a = next("a", 1 + kArxOrder);
  for (int j = 0; j < kArxOrder; ++j) m.a[j] = parse_double(a[1 + j]);
  for (int i = 0; i < kArxInputs; ++i) {
    auto b = next("b", 2 + kArxOrder);
    if (b[1] != kInputNames[i])
      throw IoError("arx model: expected coefficients for '" + kInputNames[i] + "'");
    for (int j = 0; j < kArxOrder; ++j) m.b(i, j) = parse_double(b[2 + j]);
  }
  return m;
}

}  // namespace cpbo
