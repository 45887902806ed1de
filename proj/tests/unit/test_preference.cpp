#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cpbo/errors.hpp"
#include "cpbo/kernels.hpp"
#include "cpbo/preference.hpp"
#include "oracles.hpp"

using namespace cpbo;

namespace {

struct RandomProblem {
  PreferenceDataset data;
  Eigen::MatrixXd K;
};

RandomProblem random_problem(std::mt19937_64& rng, int comparisons) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Domain dom;
  auto point = [&] {
    return EvalPoint{{dom.price_threshold_min +
                          u(rng) * (dom.price_threshold_max -
                                    dom.price_threshold_min),
                      20.0 + 6.0 * u(rng)},
                     {-10.0 + 20.0 * u(rng)}};
  };
  PreferenceDataset d(point());
  for (int i = 0; i < comparisons; ++i) d.append(point(), u(rng) < 0.5);
  std::vector<Eigen::VectorXd> xs;
  for (const auto& p : d.points()) xs.push_back(normalize_point(p, dom));
  return {d, gram_matrix(xs, KernelConfig{})};
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double s) {
  std::normal_distribution<double> nd(0.0, s);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace

TEST_CASE("sigmoid values and symmetry") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(sigmoid(700.0) == 1.0);
  CHECK(sigmoid(-700.0) > 0.0);
  CHECK(std::isfinite(log_sigmoid(-700.0)));
  CHECK(log_sigmoid(-700.0) == doctest::Approx(-700.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  double prev = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    CHECK(sigmoid(x) + sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-15));
  }
  for (int i = -700; i <= 700; i += 7) {
    CHECK(sigmoid(i) >= prev);
    prev = sigmoid(i);
  }
}

TEST_CASE("log_likelihood closed forms") {
  std::vector<int> none;
  Eigen::VectorXd one(1);
  one << 0.3;
  CHECK(log_likelihood(one, none) == 0.0);

  Eigen::VectorXd J(2);
  J << 0.7, 0.7;
  for (int q : {0, 1})
    CHECK(log_likelihood(J, std::vector<int>{q}) ==
          doctest::Approx(-std::log(2.0)));

  J << 0.0, std::log(3.0);
  CHECK(log_likelihood(J, std::vector<int>{1}) ==
        doctest::Approx(-std::log(4.0 / 3.0)).epsilon(1e-14));

  CHECK_THROWS_AS(log_likelihood(J, std::vector<int>{1, 0}), DimensionError);
}

TEST_CASE("log_likelihood matches the log-sum-exp form") {
  std::mt19937_64 rng(5);
  const std::vector<int> q{1, 0, 0, 1, 1};
  const Eigen::VectorXd J = random_vector(rng, 6, 2.0);
  double expected = 0.0;
  for (std::size_t i = 1; i <= q.size(); ++i) {
    const double a = J[static_cast<Eigen::Index>(i)];
    const double b = J[static_cast<Eigen::Index>(i - 1)];
    expected += q[i - 1] * a + (1 - q[i - 1]) * b -
                std::log(std::exp(a) + std::exp(b));
  }
  CHECK(log_likelihood(J, q) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("log_likelihood is concave") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int t = 1 + trial % 6;
    std::vector<int> q;
    for (int i = 0; i < t; ++i) q.push_back(u(rng) < 0.5);
    const Eigen::VectorXd a = random_vector(rng, t + 1, 3.0);
    const Eigen::VectorXd b = random_vector(rng, t + 1, 3.0);
    const double lam = u(rng);
    CHECK(log_likelihood(lam * a + (1 - lam) * b, q) >=
          lam * log_likelihood(a, q) + (1 - lam) * log_likelihood(b, q) -
              1e-10);
  }
}

TEST_CASE("log_likelihood gradient matches central differences") {
  std::mt19937_64 rng(9);
  const std::vector<int> q{1, 1, 0, 1};
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd J = random_vector(rng, 5, 2.0);
    const Eigen::VectorXd g = log_likelihood_gradient(J, q);
    for (Eigen::Index i = 0; i < J.size(); ++i) {
      const double h = 1e-6;
      Eigen::VectorXd jp = J, jm = J;
      jp[i] += h;
      jm[i] -= h;
      const double fd = (log_likelihood(jp, q) - log_likelihood(jm, q)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
    }
  }
}

TEST_CASE("flipping outcomes and negating utilities leaves the likelihood") {
  std::mt19937_64 rng(13);
  const std::vector<int> q{1, 0, 1};
  const std::vector<int> flipped{0, 1, 0};
  const Eigen::VectorXd J = random_vector(rng, 4, 2.0);
  const Eigen::VectorXd negJ = -J;
  CHECK(log_likelihood(J, q) ==
        doctest::Approx(log_likelihood(negJ, flipped)).epsilon(1e-15));
}

TEST_CASE("solve_mle with no comparisons returns zero") {
  const PreferenceDataset d(EvalPoint{{0.0954, 22.0}, {1.0}});
  const auto r = solve_mle(d, Eigen::MatrixXd::Identity(1, 1), 5.0);
  CHECK(r.log_likelihood == 0.0);
  CHECK(r.utilities.norm() == 0.0);
}

TEST_CASE("solve_mle with one comparison matches the ellipse boundary") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_problem(rng, 1);
    PreferenceDataset d(p.data.points(), {1});
    for (double B : {1.0, 5.0}) {
      const auto r = solve_mle(d, p.K, B);
      const double dstar =
          oracle::ellipse_max_difference(p.K.topLeftCorner<2, 2>(), B);
      CHECK(r.log_likelihood ==
            doctest::Approx(log_sigmoid(dstar)).epsilon(1e-9));
      const double norm2 = r.utilities.dot(p.K.llt().solve(r.utilities));
      CHECK(std::abs(std::sqrt(norm2) - B) <= 1e-8 * B);
    }
  }
}

TEST_CASE("solve_mle agrees with the sampling oracle for t = 3") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_problem(rng, 3);
    const double B = trial % 2 ? 1.0 : 5.0;
    const auto r = solve_mle(p.data, p.K, B);
    const double o = oracle::mle_objective(p.K, p.data.outcomes(), B, 100 + trial);
    CHECK(std::abs(r.log_likelihood - o) <= 1e-3);
    CHECK(r.log_likelihood <= 0.0);
  }
}

TEST_CASE("solve_mle is invariant to reversing the day order") {
  std::mt19937_64 rng(23);
  auto p = random_problem(rng, 4);
  std::vector<EvalPoint> pts(p.data.points().rbegin(), p.data.points().rend());
  std::vector<int> q;
  for (auto it = p.data.outcomes().rbegin(); it != p.data.outcomes().rend(); ++it)
    q.push_back(1 - *it);
  const PreferenceDataset rev(pts, q);
  const Eigen::Index n = p.K.rows();
  const Eigen::MatrixXd Krev = p.K.reverse();
  const auto a = solve_mle(p.data, p.K, 5.0);
  const auto b = solve_mle(rev, Krev, 5.0);
  CHECK(a.log_likelihood == doctest::Approx(b.log_likelihood).epsilon(1e-9));
  for (Eigen::Index i = 0; i < n; ++i)
    CHECK(a.utilities[i] == doctest::Approx(b.utilities[n - 1 - i]).epsilon(1e-6));
}

TEST_CASE("ell_mle is nondecreasing in B") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = random_problem(rng, 5);
    double prev = -1e300;
    for (double B : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      const double l = solve_mle(p.data, p.K, B).log_likelihood;
      CHECK(l >= prev - 1e-10);
      prev = l;
    }
  }
}

TEST_CASE("solve_mle rejects bad inputs") {
  std::mt19937_64 rng(31);
  auto p = random_problem(rng, 2);
  CHECK_THROWS_AS(solve_mle(p.data, p.K, 0.0), ConfigError);
  Eigen::MatrixXd bad = p.K;
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(solve_mle(p.data, bad, 5.0), SolverError);
  CHECK_THROWS_AS(solve_mle(p.data, Eigen::MatrixXd::Identity(2, 2), 5.0),
                  DimensionError);
}

TEST_CASE("confidence_margin arithmetic") {
  std::mt19937_64 rng(37);
  auto p = random_problem(rng, 3);
  const auto r = solve_mle(p.data, p.K, 5.0);
  ConfidenceState cs{5.0, 1.0, r.log_likelihood, r.utilities};
  CHECK(confidence_margin(r.utilities, p.data, cs) == doctest::Approx(1.0));
  cs.beta = 0.0;
  CHECK(confidence_margin(r.utilities, p.data, cs) == doctest::Approx(0.0));
  // Scale J toward 0 until ℓ(J) = ℓ_MLE − 2β, then the margin is −β.
  cs.beta = 0.1;
  double lo = 0.0, hi = 1.0;
  const double target = r.log_likelihood - 2 * cs.beta;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (log_likelihood(Eigen::VectorXd(mid * r.utilities), p.data) > target)
      hi = mid;
    else
      lo = mid;
  }
  if (log_likelihood(Eigen::VectorXd::Zero(r.utilities.size()), p.data) < target) {
    const Eigen::VectorXd J = hi * r.utilities;
    CHECK(confidence_margin(J, p.data, cs) == doctest::Approx(-0.1).epsilon(1e-9));
  }
}

TEST_CASE("dataset text record round-trips") {
  std::mt19937_64 rng(41);
  auto p = random_problem(rng, 4);
  std::stringstream ss;
  write_dataset(ss, p.data);
  const std::string text = ss.str();
  CHECK(read_dataset(ss) == p.data);
  std::stringstream again;
  std::istringstream in(text);
  write_dataset(again, read_dataset(in));
  CHECK(again.str() == text);
}

TEST_CASE("dataset rejects malformed construction") {
  CHECK_THROWS_AS(PreferenceDataset({}, {}), DimensionError);
  CHECK_THROWS_AS(PreferenceDataset({EvalPoint{}}, {1}), DimensionError);
  PreferenceDataset d(EvalPoint{});
  CHECK_THROWS_AS(d.append(EvalPoint{}, 2), DimensionError);
}
