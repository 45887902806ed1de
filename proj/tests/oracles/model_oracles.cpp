#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "oracles.hpp"

namespace cpbo::oracle {

EnumerationResult enumerate_valves(const EnumerationInstance& inst, double grid_step) {
  const std::size_t n = inst.free_response.size();
  if (inst.impulse.size() != n || inst.lower.size() != n || inst.upper.size() != n ||
      inst.energy_cost.size() != n)
    throw std::invalid_argument("enumerate_valves: inconsistent instance");
  const int levels = static_cast<int>(std::lround(1.0 / grid_step)) + 1;
  std::vector<int> idx(n, 0);
  EnumerationResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<double> u(n);
  while (true) {
    for (std::size_t j = 0; j < n; ++j) u[j] = std::min(1.0, idx[j] * grid_step);
    double obj = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      obj += inst.energy_cost[k] * u[k];
      double y = inst.free_response[k];
      for (std::size_t j = 0; j <= k; ++j) y += inst.impulse[k - j] * u[j];
      const double viol = std::max({0.0, inst.lower[k] - y, y - inst.upper[k]});
      obj += inst.slack_weight * viol;
    }
    if (obj < best.objective) {
      best.objective = obj;
      best.valves = u;
    }
    std::size_t d = 0;
    while (d < n && ++idx[d] == levels) idx[d++] = 0;
    if (d == n) break;
  }
  return best;
}

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  if (flo * f(hi) > 0.0) throw std::runtime_error("bisect: no sign change");
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double reference_pmv(double ta, double met, double clo, double air_speed, double rh) {
  const double tr = ta;
  const double M = met * 58.15;
  const double W = 0.0;
  const double Icl = 0.155 * clo;
  const double fcl = Icl <= 0.078 ? 1.0 + 1.29 * Icl : 1.05 + 0.645 * Icl;
  const double pa = rh * 10.0 * std::exp(16.6536 - 4030.183 / (ta + 235.0));
  auto hc_of = [&](double tcl) {
    return std::max(2.38 * std::pow(std::abs(tcl - ta), 0.25), 12.1 * std::sqrt(air_speed));
  };
  auto radiation = [&](double tcl) {
    return 3.96e-8 * fcl * (std::pow(tcl + 273.0, 4) - std::pow(tr + 273.0, 4));
  };
  // Clothing heat balance: tcl = 35.7 − 0.028(M − W) − Icl·(R + C).
  auto balance = [&](double tcl) {
    return 35.7 - 0.028 * (M - W) - Icl * (radiation(tcl) + fcl * hc_of(tcl) * (tcl - ta)) -
           tcl;
  };
  const double tcl = bisect(balance, ta - 20.0, 40.0);
  const double mw = M - W;
  const double load = mw - 3.05e-3 * (5733.0 - 6.99 * mw - pa) -
                      (mw > 58.15 ? 0.42 * (mw - 58.15) : 0.0) -
                      1.7e-5 * M * (5867.0 - pa) - 0.0014 * M * (34.0 - ta) -
                      radiation(tcl) - fcl * hc_of(tcl) * (tcl - ta);
  return (0.303 * std::exp(-0.036 * M) + 0.028) * load;
}

double reference_neutral_temperature(double lo, double hi) {
  return bisect([](double t) { return reference_pmv(t); }, lo, hi);
}

std::pair<double, double> integrate_rc(const RcParams& p, double zone, double wall,
                                       double valve, double outdoor, double solar,
                                       double seconds, double dt) {
  const double gain = valve * p.heater_power + p.solar_gain_area * solar;
  auto f = [&](double z, double w) {
    const double qzw = (w - z) / p.r_zone_wall;
    const double qwo = (outdoor - w) / p.r_wall_out;
    return std::pair{(qzw + gain) / p.zone_capacity, (qwo - qzw) / p.wall_capacity};
  };
  const long steps = std::lround(seconds / dt);
  for (long i = 0; i < steps; ++i) {
    const auto [k1z, k1w] = f(zone, wall);
    const auto [k2z, k2w] = f(zone + 0.5 * dt * k1z, wall + 0.5 * dt * k1w);
    const auto [k3z, k3w] = f(zone + 0.5 * dt * k2z, wall + 0.5 * dt * k2w);
    const auto [k4z, k4w] = f(zone + dt * k3z, wall + dt * k3w);
    zone += dt / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
    wall += dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
  }
  return {zone, wall};
}

}  // namespace cpbo::oracle
