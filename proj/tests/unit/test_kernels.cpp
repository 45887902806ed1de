#include <doctest.h>

#include <cmath>
#include <random>

#include "cpbo/errors.hpp"
#include "cpbo/kernels.hpp"
#include "oracles.hpp"

using namespace cpbo;

namespace {

Eigen::VectorXd random_coords(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(dim);
  for (int d = 0; d < dim; ++d) x[d] = u(rng);
  return x;
}

}  // namespace

TEST_CASE("normalize_point maps the domain corners and center") {
  const Domain dom;
  const auto lo = normalize_point({{0.0889, 20.0}, {-10.0}}, dom);
  const auto hi = normalize_point({{0.1019, 26.0}, {10.0}}, dom);
  const auto mid = normalize_point({{0.0954, 23.0}, {0.0}}, dom);
  for (int d = 0; d < 3; ++d) {
    CHECK(lo[d] == doctest::Approx(0.0));
    CHECK(hi[d] == doctest::Approx(1.0));
    CHECK(mid[d] == doctest::Approx(0.5));
  }
}

TEST_CASE("normalize_point clamps the context and drops it when static") {
  const Domain dom;
  const auto x = normalize_point({{0.0954, 23.0}, {25.0}}, dom);
  CHECK(x[2] == 1.0);
  CHECK(normalize_point({{0.0954, 23.0}, {0.0}}, dom, false).size() == 2);
}

TEST_CASE("normalize_point rejects a zero-width dimension") {
  Domain dom;
  dom.setpoint_max = dom.setpoint_min;
  CHECK_THROWS_AS(normalize_point({{0.0954, 20.0}, {0.0}}, dom), ConfigError);
}

TEST_CASE("kernel_eval closed forms") {
  const KernelConfig cfg;
  Eigen::VectorXd x(3), y(3);
  x << 0.1, 0.4, 0.7;
  y = x;
  CHECK(kernel_eval(x, y, cfg) == 1.0);
  y[1] += cfg.lengthscales[1];
  CHECK(kernel_eval(x, y, cfg) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(kernel_eval(x, y, cfg) == kernel_eval(y, x, cfg));
  CHECK_THROWS_AS(kernel_eval(x, Eigen::VectorXd::Zero(2), cfg), DimensionError);
}

TEST_CASE("gram_matrix small cases") {
  KernelConfig cfg;
  Eigen::VectorXd x(3);
  x << 0.3, 0.3, 0.3;
  const auto K1 = gram_matrix({x}, cfg);
  CHECK(K1(0, 0) == 1.0 + 1e-6);

  const auto K2 = gram_matrix({x, x}, cfg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K2);
  CHECK(es.eigenvalues()[0] == doctest::Approx(1e-6).epsilon(1e-6));
  CHECK(es.eigenvalues()[1] == doctest::Approx(2.0 + 1e-6));
  CHECK(K2.llt().info() == Eigen::Success);

  CHECK_THROWS_AS(gram_matrix({}, cfg), DimensionError);
}

TEST_CASE("gram_matrix smallest eigenvalue is at least the jitter") {
  std::mt19937_64 rng(11);
  KernelConfig cfg;
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(random_coords(rng, 3));
  const auto K = gram_matrix(pts, cfg);
  const double lam = oracle::jacobi_min_eigenvalue(K);
  CHECK(lam >= cfg.jitter * (1.0 - 1e-6));
}

TEST_CASE("gram_matrix factorizes for 200 points with small jitter") {
  std::mt19937_64 rng(3);
  KernelConfig cfg;
  cfg.jitter = 1e-8;
  std::vector<Eigen::VectorXd> pts;
  // Half the points repeat, the worst case for conditioning.
  for (int i = 0; i < 100; ++i) pts.push_back(random_coords(rng, 3));
  for (int i = 0; i < 100; ++i) pts.push_back(pts[static_cast<std::size_t>(i)]);
  CHECK(gram_matrix(pts, cfg).llt().info() == Eigen::Success);
}

TEST_CASE("static kernel ignores the context") {
  KernelConfig cfg;
  cfg.contextual = false;
  const Domain dom;
  const auto a = normalize_point({{0.09, 21.0}, {-8.0}}, dom, false);
  const auto b = normalize_point({{0.095, 24.0}, {7.0}}, dom, false);
  const auto c = normalize_point({{0.095, 24.0}, {-3.0}}, dom, false);
  CHECK(kernel_eval(a, b, cfg) == kernel_eval(a, c, cfg));
}
