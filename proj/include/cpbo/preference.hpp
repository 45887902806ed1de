#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cpbo/kernels.hpp"

namespace cpbo {

// Iteration controls shared by the convex solvers of the preference model.
struct SolverOptions {
  // First-order optimality target in α-coordinates (J = L α, K = L Lᵀ).
  double tolerance = 1e-7;
  // Cap on Newton iterations, summed over all inner solves.
  int max_iterations = 500;
};

// One binary comparison between day `now` and day `prev` = now - 1.
struct Comparison {
  std::size_t now = 0;
  std::size_t prev = 0;
  int outcome = 0;  // 1: day `now` preferred
};

// Daily evaluation points and the consecutive-day comparisons between them.
// Point 0 is the seed day; comparison i (1-based) relates point i to point
// i - 1, so there is always exactly one more point than comparisons.
class PreferenceDataset {
 public:
  explicit PreferenceDataset(EvalPoint seed_point);
  PreferenceDataset(std::vector<EvalPoint> points, std::vector<int> outcomes);

  void append(const EvalPoint& point, int outcome);

  const std::vector<EvalPoint>& points() const { return points_; }
  // outcomes()[i - 1] holds q_i.
  const std::vector<int>& outcomes() const { return outcomes_; }
  std::vector<Comparison> comparisons() const;

  std::size_t size() const { return points_.size(); }
  std::size_t num_comparisons() const { return outcomes_.size(); }
  const EvalPoint& last() const { return points_.back(); }

  bool operator==(const PreferenceDataset&) const = default;

 private:
  std::vector<EvalPoint> points_;
  std::vector<int> outcomes_;
};

// Logistic function, stable for large |x|.
double sigmoid(double x);
// log σ(x) without overflow or cancellation.
double log_sigmoid(double x);

// ℓ(J) = Σ_i log σ(s_i (J_i − J_{i−1})), s_i = +1 if q_i = 1 else −1.
// J must have outcomes.size() + 1 entries.
double log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& utilities,
                      std::span<const int> outcomes);
double log_likelihood(const Eigen::VectorXd& utilities,
                      const PreferenceDataset& data);

Eigen::VectorXd log_likelihood_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& utilities,
    std::span<const int> outcomes);

// Rows of the comparison-difference operator applied to a Cholesky factor:
// row i - 1 is L.row(i) - L.row(i - 1), so Δ = M α for J = L α.
Eigen::MatrixXd difference_factor(const Eigen::MatrixXd& chol_lower);

struct MleResult {
  Eigen::VectorXd utilities;  // J at the maximizer
  Eigen::VectorXd alpha;      // J = L α, ‖α‖ ≤ B
  double log_likelihood = 0.0;
  double multiplier = 0.0;  // Lagrange multiplier of the norm constraint
  double optimality = 0.0;  // ‖∇ℓ − multiplier·α‖ in α-coordinates
  int iterations = 0;
};

// max ℓ(J) s.t. Jᵀ K⁻¹ J ≤ B², solved as max ℓ(L α) over ‖α‖ ≤ B.
MleResult solve_mle(const PreferenceDataset& data, const Eigen::MatrixXd& gram,
                    double rkhs_bound, const SolverOptions& options = {});
// Same program given the lower Cholesky factor of the Gram matrix.
MleResult solve_mle_factored(std::span<const int> outcomes,
                             const Eigen::MatrixXd& chol_lower,
                             double rkhs_bound,
                             const SolverOptions& options = {});

struct ConfidenceState {
  double rkhs_bound = 5.0;
  double beta = 1.0;
  double ell_mle = 0.0;
  Eigen::VectorXd mle_vector;
};

// ℓ(J) − (ℓ_MLE − β); J lies in the confidence set iff this is ≥ 0 and
// the norm constraint holds.
double confidence_margin(const Eigen::VectorXd& utilities,
                         const PreferenceDataset& data,
                         const ConfidenceState& cs);

// Line-oriented record: "day theta1 theta2 z q", with q = "-" on day 0.
void write_dataset(std::ostream& out, const PreferenceDataset& data);
PreferenceDataset read_dataset(std::istream& in);

}  // namespace cpbo
