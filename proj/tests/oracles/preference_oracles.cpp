#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "oracles.hpp"

namespace cpbo::oracle {

namespace {

double log_sig(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sig(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

// Comparison-difference matrix D with (DJ)_i = J_{i+1} − J_i.
Eigen::MatrixXd chain_difference(Eigen::Index points) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(points - 1, 0),
                                            points);
  for (Eigen::Index i = 0; i + 1 < points; ++i) {
    D(i, i) = -1.0;
    D(i, i + 1) = 1.0;
  }
  return D;
}

// Value, gradient and Hessian of α ↦ ℓ(A α) where A = D L.
struct Quad {
  double f;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
};

Quad likelihood_quad(const Eigen::MatrixXd& A, const std::vector<int>& q,
                     const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd d = A * alpha;
  Eigen::VectorXd r(d.size()), w(d.size());
  double f = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double s = q[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    f += log_sig(s * d[i]);
    r[i] = s * sig(-s * d[i]);
    w[i] = sig(d[i]) * sig(-d[i]);
  }
  return {f, A.transpose() * r, -A.transpose() * w.asDiagonal() * A};
}

Eigen::VectorXd random_in_ball(std::mt19937_64& rng, Eigen::Index n, double B) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  const double r = B * std::pow(ud(rng), 1.0 / static_cast<double>(n));
  return v * (r / v.norm());
}

// Generic log-barrier Newton ascent: maximize obj(α) + μ Σ log(c_j(α)) with
// μ driven to ~1e-13. `eval` fills value/gradient/Hessian of the barrier
// function at (α, μ) and returns false outside the strict interior.
template <class Eval>
Eigen::VectorXd barrier_ascent(Eigen::VectorXd alpha, Eval eval) {
  const Eigen::Index n = alpha.size();
  double f = 0.0;
  Eigen::VectorXd g(n);
  Eigen::MatrixXd H(n, n);
  for (double mu = 1.0; mu > 1e-13; mu *= 0.1) {
    for (int it = 0; it < 200; ++it) {
      if (!eval(alpha, mu, f, g, H)) throw std::logic_error("left interior");
      Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
      Eigen::VectorXd step = ldlt.solve(g);
      double dec = g.dot(step);
      if (!(dec > 0.0) || !step.allFinite()) {
        step = g;  // fall back to gradient ascent
        dec = g.squaredNorm();
      }
      if (dec < 1e-24) break;
      double t = 1.0;
      double f_new;
      Eigen::VectorXd g_new(n);
      Eigen::MatrixXd H_new(n, n);
      for (;;) {
        const Eigen::VectorXd trial = alpha + t * step;
        if (eval(trial, mu, f_new, g_new, H_new) &&
            f_new >= f + 1e-4 * t * dec) {
          alpha = trial;
          break;
        }
        t *= 0.5;
        if (t < 1e-18) break;
      }
      if (t < 1e-18) break;
    }
  }
  return alpha;
}

}  // namespace

double chain_log_likelihood(const Eigen::VectorXd& J,
                            const std::vector<int>& outcomes) {
  double total = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double d = J[static_cast<Eigen::Index>(i + 1)] -
                     J[static_cast<Eigen::Index>(i)];
    total += log_sig(outcomes[i] ? d : -d);
  }
  return total;
}

double mle_objective(const Eigen::MatrixXd& K, const std::vector<int>& outcomes,
                     double B, std::uint64_t seed) {
  const Eigen::Index n = K.rows();
  const Eigen::MatrixXd L = K.llt().matrixL();
  const Eigen::MatrixXd A = chain_difference(n) * L;
  std::mt19937_64 rng(seed);

  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_f = likelihood_quad(A, outcomes, best).f;
  for (int s = 0; s < 4000; ++s) {
    const Eigen::VectorXd a = random_in_ball(rng, n, B);
    const double f = likelihood_quad(A, outcomes, a).f;
    if (f > best_f) {
      best_f = f;
      best = a;
    }
  }
  if (best.norm() >= B) best *= 0.999 * B / best.norm();

  auto eval = [&](const Eigen::VectorXd& a, double mu, double& f,
                  Eigen::VectorXd& g, Eigen::MatrixXd& H) {
    const double s = B * B - a.squaredNorm();
    if (!(s > 0.0)) return false;
    const Quad q = likelihood_quad(A, outcomes, a);
    f = q.f + mu * std::log(s);
    g = q.g - (2.0 * mu / s) * a;
    H = q.H - (2.0 * mu / s) * Eigen::MatrixXd::Identity(n, n) -
        (4.0 * mu / (s * s)) * a * a.transpose();
    return true;
  };
  const Eigen::VectorXd polished = barrier_ascent(best, eval);
  return std::max(best_f, likelihood_quad(A, outcomes, polished).f);
}

double ellipse_max_difference(const Eigen::Matrix2d& K, double B) {
  const Eigen::Matrix2d L = K.llt().matrixL();
  auto diff = [&](double phi) {
    const Eigen::Vector2d J = B * L * Eigen::Vector2d(std::cos(phi), std::sin(phi));
    return J[1] - J[0];
  };
  constexpr int kGrid = 200000;
  double best_phi = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / kGrid;
    const double v = diff(phi);
    if (v > best) {
      best = v;
      best_phi = phi;
    }
  }
  double a = best_phi - 2.0 * std::numbers::pi / kGrid;
  double b = best_phi + 2.0 * std::numbers::pi / kGrid;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 100; ++i) {
    const double c = b - gr * (b - a);
    const double d = a + gr * (b - a);
    if (diff(c) > diff(d))
      b = d;
    else
      a = c;
  }
  return std::max(best, diff(0.5 * (a + b)));
}

AcquisitionOracleResult acquisition_value(const Eigen::MatrixXd& K_ext,
                                          const std::vector<int>& outcomes,
                                          double floor, double B,
                                          std::uint64_t seed) {
  const Eigen::Index m = K_ext.rows();  // dataset points + candidate
  const Eigen::Index n = m - 1;
  const Eigen::MatrixXd L = K_ext.llt().matrixL();
  // Likelihood acts on the first n utilities only.
  const Eigen::MatrixXd A = chain_difference(n) * L.topRows(n);
  Eigen::VectorXd c = L.row(m - 1).transpose() - L.row(m - 2).transpose();
  const bool constrained = !outcomes.empty() || floor > 0.0;
  std::mt19937_64 rng(seed);

  auto slack_of = [&](const Eigen::VectorXd& a) {
    return likelihood_quad(A, outcomes, a).f - floor;
  };

  Eigen::VectorXd start;
  double start_obj = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < 20000; ++s) {
    const Eigen::VectorXd a = random_in_ball(rng, m, B);
    if (constrained && !(slack_of(a) > 0.0)) continue;
    const double v = c.dot(a);
    if (v > start_obj) {
      start_obj = v;
      start = a;
    }
  }
  if (start.size() == 0) {
    // Rejection sampling missed the set: start near the likelihood maximizer
    // over the ball, which is strictly feasible for floor < ℓ_MLE.
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
    auto eval = [&](const Eigen::VectorXd& x, double mu, double& f,
                    Eigen::VectorXd& g, Eigen::MatrixXd& H) {
      const double s = B * B - x.squaredNorm();
      if (!(s > 0.0)) return false;
      const Quad q = likelihood_quad(A, outcomes, x);
      f = q.f + mu * std::log(s);
      g = q.g - (2.0 * mu / s) * x;
      H = q.H - (2.0 * mu / s) * Eigen::MatrixXd::Identity(m, m) -
          (4.0 * mu / (s * s)) * x * x.transpose();
      return true;
    };
    a = barrier_ascent(a, eval);
    a *= 0.999;
    if (!(slack_of(a) > 0.0))
      throw std::runtime_error("oracle: no strictly feasible point found");
    start = a;
  }

  auto eval = [&](const Eigen::VectorXd& a, double mu, double& f,
                  Eigen::VectorXd& g, Eigen::MatrixXd& H) {
    const double s = B * B - a.squaredNorm();
    if (!(s > 0.0)) return false;
    f = c.dot(a) + mu * std::log(s);
    g = c - (2.0 * mu / s) * a;
    H = -(2.0 * mu / s) * Eigen::MatrixXd::Identity(m, m) -
        (4.0 * mu / (s * s)) * a * a.transpose();
    if (constrained) {
      const Quad q = likelihood_quad(A, outcomes, a);
      const double r = q.f - floor;
      if (!(r > 0.0)) return false;
      f += mu * std::log(r);
      g += (mu / r) * q.g;
      H += (mu / r) * q.H - (mu / (r * r)) * q.g * q.g.transpose();
    }
    return true;
  };
  const Eigen::VectorXd alpha = barrier_ascent(start, eval);
  AcquisitionOracleResult res;
  res.value = c.dot(alpha);
  res.utilities = L * alpha;
  return res;
}

double jacobi_min_eigenvalue(Eigen::MatrixXd A) {
  const Eigen::Index n = A.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(A(p, q)) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = cs * akp - sn * akq;
          A(k, q) = sn * akp + cs * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = cs * apk - sn * aqk;
          A(q, k) = sn * apk + cs * aqk;
        }
      }
    }
  }
  return A.diagonal().minCoeff();
}

}  // namespace cpbo::oracle
