#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cpbo/preference.hpp"

namespace cpbo {

struct AcquisitionResult {
  double value = 0.0;         // optimal J_t − J_{t−1}
  Eigen::VectorXd utilities;  // maximizing J over dataset points + candidate
  Eigen::VectorXd alpha;      // α-coordinates of the dataset block
  double multiplier = 0.0;    // multiplier of the likelihood constraint
  double norm_multiplier = 0.0;  // multiplier of the norm constraint
  double likelihood_margin = 0.0;  // ℓ(J) − (ℓ_MLE − β)
  int iterations = 0;
  bool converged = false;
};

// The optimistic-improvement program for one day:
//
//   max  J_t − J_{t−1}
//   s.t. ℓ(J_0..J_{t−1}) ≥ ℓ_MLE − β,   Jᵀ K(θ, z)⁻¹ J ≤ B²,
//
// where K(θ, z) is the Gram matrix over the t dataset points followed by the
// candidate. With the candidate ordered last, the Cholesky factor of K(θ, z)
// extends the dataset factor L by one row (l21ᵀ, l22), so in α-coordinates
// the feasible set does not depend on the candidate and only the objective
// direction does. Both constraints are handled through their multipliers
// (λ for the likelihood, ν for the norm): for fixed (λ, ν) the Lagrangian is
// strongly concave, the candidate coordinate is l22/ν in closed form, and the
// dataset block follows from Newton's method.
class AcquisitionProblem {
 public:
  AcquisitionProblem(Eigen::MatrixXd chol_lower, std::vector<int> outcomes,
                     Eigen::VectorXd mle_alpha, double ell_mle, double beta,
                     double rkhs_bound);

  // `kernel_column` holds k(candidate, x_i) for the dataset points and
  // `self_kernel` is k(candidate, candidate) + jitter. `warm` optionally
  // carries a previous result to start from.
  AcquisitionResult evaluate(const Eigen::VectorXd& kernel_column,
                             double self_kernel,
                             const SolverOptions& options = {},
                             const AcquisitionResult* warm = nullptr) const;

  Eigen::Index size() const { return chol_.rows(); }
  double ell_mle() const { return ell_mle_; }
  double beta() const { return beta_; }
  double rkhs_bound() const { return bound_; }
  const Eigen::MatrixXd& chol_lower() const { return chol_; }
  std::span<const int> outcomes() const { return outcomes_; }

 private:
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd diff_;  // difference_factor(chol_)
  std::vector<int> outcomes_;
  Eigen::VectorXd mle_alpha_;
  double ell_mle_;
  double beta_;
  double bound_;
};

}  // namespace cpbo
