#include <doctest.h>

#include <cmath>
#include <random>

#include "cpbo/errors.hpp"
#include "cpbo/tuner.hpp"
#include "oracles.hpp"

using namespace cpbo;

TEST_CASE("theta grid layout") {
  const TunerConfig cfg;
  const auto grid = make_theta_grid(cfg);
  REQUIRE(grid.size() == 14u * 25u);
  CHECK(grid.front().price_threshold == 0.0889);
  CHECK(grid.front().lower_setpoint == 20.0);
  CHECK(grid.back().price_threshold == 0.1019);
  CHECK(grid.back().lower_setpoint == 26.0);
  CHECK(grid[1].lower_setpoint == doctest::Approx(20.25));
  CHECK(grid[25].price_threshold == doctest::Approx(0.0899));
}

TEST_CASE("first proposal is the grid point farthest in kernel distance") {
  const TunerConfig cfg;
  const TunerState s = make_tuner_state(cfg, {2.0});
  const Context z{-3.0};
  const auto p = propose_detailed(s, z);
  double best = -1.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < s.theta_grid.size(); ++i) {
    const auto x = normalize_point({s.theta_grid[i], z}, cfg.domain);
    const double d = std::sqrt(2.0 - 2.0 * kernel_eval(x, s.coords[0], cfg.kernel));
    if (d > best + 1e-12) {
      best = d;
      best_i = i;
    }
  }
  CHECK(p.grid_index == best_i);
  CHECK(p.value == doctest::Approx(5.0 * best).epsilon(1e-6));
}

TEST_CASE("proposals stay on the grid and are deterministic") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TunerState s = make_tuner_state(TunerConfig{}, {0.0});
  for (int day = 1; day <= 4; ++day) {
    const Context z{-10.0 + 20.0 * u(rng)};
    const ParamPoint a = propose(s, z);
    const ParamPoint b = propose(s, z);
    CHECK(a == b);
    CHECK(std::find(s.theta_grid.begin(), s.theta_grid.end(), a) !=
          s.theta_grid.end());
    CHECK(s.config.domain.contains(a));
    s = update(s, a, z, u(rng) < 0.5);
  }
}

TEST_CASE("propose clamps an out-of-range context") {
  const TunerState s = make_tuner_state(TunerConfig{}, {0.0});
  CHECK(propose(s, {40.0}) == propose(s, {10.0}));
}

TEST_CASE("consistent preference for low setpoints pulls proposals down") {
  // Each day alternates between a low and a high setpoint; the occupant
  // always prefers the lower one.
  TunerState s = make_tuner_state(TunerConfig{}, {0.0});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int day = 1; day <= 12; ++day) {
    const Context z{-10.0 + 20.0 * u(rng)};
    const ParamPoint theta{0.0889 + 0.013 * u(rng), 20.0 + 6.0 * u(rng)};
    const int q = theta.lower_setpoint <= s.previous().theta.lower_setpoint;
    s = update(s, theta, z, q);
  }
  const ParamPoint p = propose(s, {0.0});
  CHECK(p.lower_setpoint < 23.0);
}

TEST_CASE("update bookkeeping") {
  TunerState s = make_tuner_state(TunerConfig{}, {1.0});
  CHECK(s.dataset.size() == 1);
  CHECK(s.cs.ell_mle == 0.0);
  const ParamPoint theta{0.095, 23.0};
  const TunerState s1 = update(s, theta, {2.0}, 1);
  CHECK(s1.dataset.size() == 2);
  CHECK(s1.dataset.num_comparisons() == 1);
  CHECK(s1.previous().theta == theta);
  CHECK(s1.previous().context.mean_outdoor_temp == 2.0);
  CHECK(s1.cs.ell_mle <= 0.0);
}

TEST_CASE("repeating a preferred comparison does not lower its fitted likelihood") {
  // Once: x preferred over p0. Twice: the pair is visited again (p0, x, p0, x)
  // with the same preference each time. Both datasets span the same two
  // points, so the per-comparison likelihood can only improve.
  TunerConfig cfg;
  const ParamPoint p0 = cfg.seed_theta;
  const ParamPoint x{0.0919, 24.5};
  const Context z0{1.0}, zx{2.0};
  const TunerState base = make_tuner_state(cfg, z0);
  const TunerState once = update(base, x, zx, 1);
  const TunerState twice = update(update(once, p0, z0, 0), x, zx, 1);
  CHECK(twice.cs.ell_mle / 3.0 >= once.cs.ell_mle - 1e-7);
  const double oracle_once = oracle::mle_objective(
      gram_matrix(once.coords, cfg.kernel), once.dataset.outcomes(), 5.0, 1);
  const double oracle_twice = oracle::mle_objective(
      gram_matrix(twice.coords, cfg.kernel), twice.dataset.outcomes(), 5.0, 2);
  CHECK(std::abs(once.cs.ell_mle - oracle_once) <= 1e-6);
  CHECK(std::abs(twice.cs.ell_mle - oracle_twice) <= 1e-6);
}

TEST_CASE("predict_optimal_theta2 needs five comparisons") {
  TunerState s = make_tuner_state(TunerConfig{}, {0.0});
  for (int i = 0; i < 4; ++i) s = update(s, {0.09, 21.0 + i}, {0.0}, 1);
  CHECK_THROWS_AS(predict_optimal_theta2(s, {{0.0}}), InsufficientDataError);
}

TEST_CASE("predict_optimal_theta2 returns a dominant point's setpoint") {
  // The starred point wins every comparison it takes part in and the others
  // lose every one, so the MLE peaks there.
  TunerConfig cfg;
  cfg.seed_theta = {0.0889, 20.0};
  const Context z{0.0};
  TunerState s = make_tuner_state(cfg, z);
  const ParamPoint star{0.0959, 24.0};
  const std::vector<ParamPoint> others{{0.1019, 20.0}, {0.0889, 26.0},
                                       {0.1019, 26.0}};
  for (const ParamPoint& o : others) {
    s = update(s, star, z, 1);
    s = update(s, o, z, 0);
  }
  REQUIRE(s.dataset.num_comparisons() == 6);
  const auto th = predict_optimal_theta2(s, {z});
  CHECK(th[0] == doctest::Approx(star.lower_setpoint));
  CHECK(predicted_utility(s, star, z) ==
        doctest::Approx(s.cs.mle_vector[1]).epsilon(1e-4));
}

TEST_CASE("logarithmic beta schedule") {
  TunerConfig cfg;
  cfg.beta_schedule.kind = BetaSchedule::Kind::logarithmic;
  cfg.beta_schedule.growth = 0.5;
  CHECK(cfg.beta_at(0) == 1.0);
  CHECK(cfg.beta_at(9) == doctest::Approx(1.0 + 0.5 * std::log(10.0)));
  TunerConfig fixed;
  CHECK(fixed.beta_at(100) == 1.0);
}

TEST_CASE("tuner config validation") {
  TunerConfig cfg;
  cfg.rkhs_bound = -1.0;
  CHECK_THROWS_AS(make_tuner_state(cfg, {0.0}), ConfigError);
  cfg = {};
  cfg.seed_theta = {0.2, 22.0};
  CHECK_THROWS_AS(make_tuner_state(cfg, {0.0}), ConfigError);
}
