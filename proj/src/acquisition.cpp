#include "cpbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpbo/errors.hpp"

namespace cpbo {

AcquisitionProblem::AcquisitionProblem(Eigen::MatrixXd chol_lower,
                                       std::vector<int> outcomes,
                                       Eigen::VectorXd mle_alpha,
                                       double ell_mle, double beta,
                                       double rkhs_bound)
    : chol_(std::move(chol_lower)),
      outcomes_(std::move(outcomes)),
      mle_alpha_(std::move(mle_alpha)),
      ell_mle_(ell_mle),
      beta_(beta),
      bound_(rkhs_bound) {
  if (chol_.rows() != chol_.cols() ||
      static_cast<std::size_t>(chol_.rows()) != outcomes_.size() + 1)
    throw DimensionError("acquisition: factor does not match comparisons");
  if (mle_alpha_.size() != chol_.rows())
    throw DimensionError("acquisition: MLE vector has wrong length");
  if (!(bound_ > 0.0)) throw ConfigError("acquisition: B must be positive");
  if (!(beta_ >= 0.0)) throw ConfigError("acquisition: beta must be >= 0");
  diff_ = difference_factor(chol_);
}

namespace {

struct Terms {
  double value = 0.0;
  Eigen::VectorXd slope;
  Eigen::VectorXd weight;
};

Terms likelihood_terms(const Eigen::MatrixXd& diff, std::span<const int> q,
                       const Eigen::VectorXd& alpha) {
  Terms t;
  const Eigen::VectorXd delta = diff * alpha;
  t.slope.resize(delta.size());
  t.weight.resize(delta.size());
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    const double s = q[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    const double x = s * delta[i];
    t.value += log_sigmoid(x);
    const double p = sigmoid(x);
    t.slope[i] = s * (1.0 - p);
    t.weight[i] = p * (1.0 - p);
  }
  return t;
}

}  // namespace

AcquisitionResult AcquisitionProblem::evaluate(
    const Eigen::VectorXd& kernel_column, double self_kernel,
    const SolverOptions& options, const AcquisitionResult* warm) const {
  const Eigen::Index n = chol_.rows();
  if (kernel_column.size() != n)
    throw DimensionError("acquisition: kernel column has wrong length");
  const double B = bound_;

  const Eigen::VectorXd l21 =
      chol_.triangularView<Eigen::Lower>().solve(kernel_column);
  const double l22_sq = self_kernel - l21.squaredNorm();
  if (!(l22_sq > 0.0))
    throw SolverError(
        "acquisition: candidate Gram matrix is not positive definite");
  const double l22 = std::sqrt(l22_sq);
  const Eigen::VectorXd w = l21 - chol_.row(n - 1).transpose();
  const double floor_value = ell_mle_ - beta_;
  const std::span<const int> q(outcomes_);

  AcquisitionResult res;
  auto finish = [&](const Eigen::VectorXd& alpha, double slack_coord,
                    double multiplier, double g) {
    res.alpha = alpha;
    res.multiplier = multiplier;
    res.value = w.dot(alpha) + l22 * slack_coord;
    res.utilities.resize(n + 1);
    res.utilities.head(n) = chol_.triangularView<Eigen::Lower>() * alpha;
    res.utilities[n] = l21.dot(alpha) + l22 * slack_coord;
    res.likelihood_margin = g - floor_value;
    res.converged = true;
    return res;
  };

  // Without the likelihood constraint the optimum is B·c/‖c‖ for the full
  // direction c = (w, l22).
  {
    const double cnorm = std::sqrt(w.squaredNorm() + l22_sq);
    const Eigen::VectorXd alpha = (B / cnorm) * w;
    const double g =
        outcomes_.empty() ? 0.0 : likelihood_terms(diff_, q, alpha).value;
    if (g >= floor_value) {
      finish(alpha, B * l22 / cnorm, 0.0, g);
      res.norm_multiplier = cnorm / B;
      return res;
    }
  }
  if (beta_ == 0.0) {
    // The confidence set collapses to the MLE, which sits on the sphere.
    const double g = likelihood_terms(diff_, q, mle_alpha_).value;
    return finish(mle_alpha_, 0.0, std::numeric_limits<double>::infinity(), g);
  }

  // Lagrangian in α-coordinates for multipliers λ (likelihood) and ν (norm):
  //   wᵀα + l22 α_t + λ ℓ(Mα) − ν/2 (‖α‖² + α_t²),
  // maximized by α_t = l22/ν and a strongly concave Newton solve for α. The
  // pair (λ, ν) is found by nested safeguarded Newton in log-space: ν makes
  // ‖(α, α_t)‖ = B for each λ, and λ makes ℓ(Mα) = ℓ_MLE − β.
  const double feas_tol = 1e-3 * options.tolerance;
  const double l22_sq_v = l22 * l22;
  Eigen::VectorXd alpha;
  double lambda = 1.0;
  double nu = 0.0;
  if (warm != nullptr && warm->alpha.size() == n && warm->multiplier > 0.0 &&
      std::isfinite(warm->multiplier) && warm->norm_multiplier > 0.0) {
    alpha = warm->alpha;
    lambda = warm->multiplier;
    nu = warm->norm_multiplier;
  } else {
    alpha = mle_alpha_;
    const Terms t = likelihood_terms(diff_, q, alpha);
    const Eigen::VectorXd g = w + diff_.transpose() * t.slope;
    nu = std::sqrt(g.squaredNorm() + l22_sq_v) / B;
  }

  Eigen::MatrixXd neg_hess(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd grad(n);
  Eigen::VectorXd lik_grad(n);
  int iterations = 0;

  auto lagrangian = [&](const Eigen::VectorXd& a, double lam, double m) {
    return w.dot(a) + lam * likelihood_terms(diff_, q, a).value -
           0.5 * m * a.squaredNorm();
  };

  // Newton on α for fixed (λ, ν). Leaves `llt` holding the negated Hessian
  // and `lik_grad` the likelihood gradient at the returned iterate.
  auto solve_alpha = [&](double lam, double m) -> bool {
    for (;;) {
      if (++iterations > options.max_iterations) return false;
      const Terms t = likelihood_terms(diff_, q, alpha);
      lik_grad.noalias() = diff_.transpose() * t.slope;
      grad = w + lam * lik_grad - m * alpha;
      neg_hess.noalias() =
          diff_.transpose() * (lam * t.weight).asDiagonal() * diff_;
      neg_hess.diagonal().array() += m;
      llt.compute(neg_hess);
      if (llt.info() != Eigen::Success) return false;
      const Eigen::VectorXd step = llt.solve(grad);
      const double decrement = grad.dot(step);
      const double f0 = w.dot(alpha) + lam * t.value - 0.5 * m * alpha.squaredNorm();
      if (step.norm() <= 1e-13 * (1.0 + alpha.norm())) {
        alpha += step;
        return true;
      }
      if (decrement <= 1e-10 * (1.0 + std::abs(f0))) {
        // Quadratic regime: full steps, no line search (f cannot resolve
        // the remaining progress).
        alpha += step;
        continue;
      }
      double tau = 1.0;
      Eigen::VectorXd trial = alpha + step;
      while (lagrangian(trial, lam, m) < f0 + 1e-4 * tau * decrement) {
        tau *= 0.5;
        if (tau < 1e-12) return decrement <= 1e-12 * (1.0 + std::abs(f0));
        trial = alpha + tau * step;
      }
      alpha = trial;
    }
  };

  // ν with ‖(α, l22/ν)‖ = B at fixed λ; ‖·‖ is decreasing in ν.
  auto solve_nu = [&](double lam) -> bool {
    double x = std::log(nu);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) {
      nu = std::exp(x);
      if (!solve_alpha(lam, nu)) return false;
      const double at = l22 / nu;
      const double norm = std::sqrt(alpha.squaredNorm() + at * at);
      const double psi = norm - B;
      if (std::abs(psi) <= 1e-12 * B) return true;
      if (psi > 0.0)
        lo = x;
      else
        hi = x;
      // d‖·‖/d log ν = −ν (αᵀH⁻¹α + l22²/ν³) / ‖·‖.
      const double dpsi =
          -nu * (alpha.dot(llt.solve(alpha)) + l22_sq_v / (nu * nu * nu)) /
          norm;
      double next = x - psi / dpsi;
      if (!(next > lo && next < hi) || !std::isfinite(next)) {
        if (std::isinf(lo))
          next = x - 1.0;
        else if (std::isinf(hi))
          next = x + 1.0;
        else
          next = 0.5 * (lo + hi);
      }
      if (hi - lo <= 1e-15) return true;
      x = std::clamp(next, x - 4.0, x + 4.0);
    }
    return false;
  };

  double x = std::log(lambda);
  double x_lo = -std::numeric_limits<double>::infinity();
  double x_hi = std::numeric_limits<double>::infinity();
  constexpr double kLogLambdaMin = -40.0;
  constexpr double kLogLambdaMax = 40.0;
  bool ok = false;
  for (int outer = 0; outer < 100; ++outer) {
    lambda = std::exp(x);
    if (!solve_nu(lambda)) break;
    const double g = likelihood_terms(diff_, q, alpha).value;
    const double phi = g - floor_value;
    if (std::abs(phi) <= feas_tol) {
      ok = true;
      break;
    }
    if (phi < 0.0)
      x_lo = x;
    else
      x_hi = x;
    // Total derivative of φ along the ν(λ) curve.
    const Eigen::VectorXd h_lg = llt.solve(lik_grad);
    const Eigen::VectorXd h_a = llt.solve(alpha);
    const double d_l = lik_grad.dot(h_lg);
    const double d_n = -lik_grad.dot(h_a);
    const double dN_l = 2.0 * alpha.dot(h_lg);
    const double dN_n = -2.0 * alpha.dot(h_a) - 2.0 * l22_sq_v / (nu * nu * nu);
    const double dphi = d_l - d_n * dN_l / dN_n;
    double next = x - phi / (lambda * dphi);
    if (!(next > x_lo && next < x_hi) || !std::isfinite(next)) {
      if (std::isinf(x_hi))
        next = x + 2.0;
      else if (std::isinf(x_lo))
        next = x - 2.0;
      else
        next = 0.5 * (x_lo + x_hi);
    }
    next = std::clamp(next, x - 8.0, x + 8.0);
    if (next < kLogLambdaMin || next > kLogLambdaMax) break;
    if (x_hi - x_lo <= 1e-14) break;
    x = next;
  }

  const double g = likelihood_terms(diff_, q, alpha).value;
  finish(alpha, l22 / nu, lambda, g);
  res.norm_multiplier = nu;
  res.iterations = iterations;
  res.converged = ok;
  return res;
}

}  // namespace cpbo
