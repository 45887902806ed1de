#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace cpbo {

// min cᵀx  s.t.  A x = b,  G x ≤ h,  lower ≤ x ≤ upper (entries may be ±inf).
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_variables() const { return c.size(); }
  void validate() const;
};

enum class LpStatus { optimal, infeasible, numerical_failure };

std::string to_string(LpStatus s);

// Absolute residuals of the first-order conditions for a primal/dual point.
// Stationarity: c + Aᵀy + Gᵀz − w_lower + w_upper = 0.
struct KktResiduals {
  double primal = 0.0;           // max of |Ax − b|, (Gx − h)₊, bound violation
  double dual = 0.0;             // stationarity, plus any negative multiplier
  double complementarity = 0.0;  // max |z·(h − Gx)|, |w·(bound gap)|

  double max() const;
};

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  Eigen::VectorXd x;
  Eigen::VectorXd eq_dual;      // y
  Eigen::VectorXd ineq_dual;    // z ≥ 0
  Eigen::VectorXd lower_dual;   // w_lower ≥ 0
  Eigen::VectorXd upper_dual;   // w_upper ≥ 0
  double objective = 0.0;
  int iterations = 0;
  KktResiduals residuals;
};

struct LpOptions {
  int max_iterations = 80;
  double tolerance = 1e-10;  // relative, on the scaled residuals and μ
  // An optimal status is reported only if the absolute residuals meet these.
  double primal_limit = 1e-7;
  double kkt_limit = 1e-6;
};

KktResiduals kkt_residuals(const LpProblem& p, const LpSolution& s);

// Primal-dual interior point (Mehrotra predictor-corrector) on the
// regularized quasi-definite augmented system.
LpSolution solve_lp(const LpProblem& p, const LpOptions& options = {});

// Plain-text listing of every coefficient, one record per line.
void dump_lp(std::ostream& out, const LpProblem& p);
LpProblem read_lp_dump(std::istream& in);

}  // namespace cpbo
