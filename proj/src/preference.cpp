#include "cpbo/preference.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "cpbo/errors.hpp"
#include "cpbo/table_io.hpp"

namespace cpbo {

PreferenceDataset::PreferenceDataset(EvalPoint seed_point)
    : points_{seed_point} {}

PreferenceDataset::PreferenceDataset(std::vector<EvalPoint> points,
                                     std::vector<int> outcomes)
    : points_(std::move(points)), outcomes_(std::move(outcomes)) {
  if (points_.empty())
    throw DimensionError("preference dataset needs a seed point");
  if (points_.size() != outcomes_.size() + 1)
    throw DimensionError(
        "preference dataset needs exactly one more point than comparisons");
  for (int q : outcomes_)
    if (q != 0 && q != 1) throw DimensionError("comparison outcome not 0/1");
}

void PreferenceDataset::append(const EvalPoint& point, int outcome) {
  if (outcome != 0 && outcome != 1)
    throw DimensionError("comparison outcome not 0/1");
  points_.push_back(point);
  outcomes_.push_back(outcome);
}

std::vector<Comparison> PreferenceDataset::comparisons() const {
  std::vector<Comparison> out;
  out.reserve(outcomes_.size());
  for (std::size_t i = 1; i <= outcomes_.size(); ++i)
    out.push_back({i, i - 1, outcomes_[i - 1]});
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

namespace {

inline double sign_of(int q) { return q == 1 ? 1.0 : -1.0; }

void check_lengths(Eigen::Index n, std::size_t comparisons) {
  if (static_cast<std::size_t>(n) != comparisons + 1)
    throw DimensionError("utility vector length " + std::to_string(n) +
                         " does not match " + std::to_string(comparisons) +
                         " comparisons");
}

// Likelihood terms as a function of the differences Δ = M α.
struct ChainTerms {
  double value = 0.0;
  Eigen::VectorXd slope;   // dℓ/dΔ_i
  Eigen::VectorXd weight;  // −d²ℓ/dΔ_i²
};

ChainTerms chain_terms(const Eigen::VectorXd& delta,
                       std::span<const int> outcomes) {
  ChainTerms t;
  const auto m = delta.size();
  t.slope.resize(m);
  t.weight.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = sign_of(outcomes[static_cast<std::size_t>(i)]);
    const double x = s * delta[i];
    t.value += log_sigmoid(x);
    const double p = sigmoid(x);
    t.slope[i] = s * (1.0 - p);
    t.weight[i] = p * (1.0 - p);
  }
  return t;
}

}  // namespace

double log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& utilities,
                      std::span<const int> outcomes) {
  check_lengths(utilities.size(), outcomes.size());
  double total = 0.0;
  for (std::size_t i = 1; i <= outcomes.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    total += log_sigmoid(sign_of(outcomes[i - 1]) *
                         (utilities[k] - utilities[k - 1]));
  }
  return total;
}

double log_likelihood(const Eigen::VectorXd& utilities,
                      const PreferenceDataset& data) {
  return log_likelihood(utilities, std::span<const int>(data.outcomes()));
}

Eigen::VectorXd log_likelihood_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& utilities,
    std::span<const int> outcomes) {
  check_lengths(utilities.size(), outcomes.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(utilities.size());
  for (std::size_t i = 1; i <= outcomes.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double s = sign_of(outcomes[i - 1]);
    const double r = s * sigmoid(-s * (utilities[k] - utilities[k - 1]));
    g[k] += r;
    g[k - 1] -= r;
  }
  return g;
}

Eigen::MatrixXd difference_factor(const Eigen::MatrixXd& chol_lower) {
  const auto n = chol_lower.rows();
  Eigen::MatrixXd M(n > 0 ? n - 1 : 0, n);
  for (Eigen::Index i = 1; i < n; ++i)
    M.row(i - 1) = chol_lower.row(i) - chol_lower.row(i - 1);
  return M;
}

MleResult solve_mle(const PreferenceDataset& data, const Eigen::MatrixXd& gram,
                    double rkhs_bound, const SolverOptions& options) {
  if (gram.rows() != static_cast<Eigen::Index>(data.size()) ||
      gram.cols() != gram.rows())
    throw DimensionError("solve_mle: Gram matrix does not match dataset");
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SolverError("solve_mle: Gram matrix is not positive definite");
  return solve_mle_factored(data.outcomes(), llt.matrixL(), rkhs_bound,
                            options);
}

// The norm constraint is always active once there is a comparison (any
// difference vector is reachable, so the unconstrained supremum 0 is never
// attained). The solver therefore looks for μ > 0 with ‖α(μ)‖ = B, where α(μ)
// maximizes the strongly concave ℓ(Mα) − μ/2 ‖α‖². Since ‖α(μ)‖ grows only
// like log(1/μ) once the comparisons saturate, the scalar equation is solved
// by safeguarded Newton in log μ.
MleResult solve_mle_factored(std::span<const int> outcomes,
                             const Eigen::MatrixXd& chol_lower,
                             double rkhs_bound, const SolverOptions& options) {
  if (!(rkhs_bound > 0.0))
    throw ConfigError("solve_mle: RKHS bound must be positive");
  const auto n = chol_lower.rows();
  check_lengths(n, outcomes.size());

  MleResult res;
  res.alpha = Eigen::VectorXd::Zero(n);
  res.utilities = Eigen::VectorXd::Zero(n);
  if (outcomes.empty()) return res;

  const Eigen::MatrixXd M = difference_factor(chol_lower);
  const double B = rkhs_bound;

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd half_signs(M.rows());
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    half_signs[i] = 0.5 * sign_of(outcomes[static_cast<std::size_t>(i)]);
  double mu = (M.transpose() * half_signs).norm() / B;
  if (!(mu > 0.0)) mu = 1.0;

  double nu = std::log(mu);
  double nu_lo = -std::numeric_limits<double>::infinity();
  double nu_hi = std::numeric_limits<double>::infinity();
  int iterations = 0;
  Eigen::MatrixXd neg_hess(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd grad(n);

  auto objective = [&](const Eigen::VectorXd& a, double m) {
    return chain_terms(M * a, outcomes).value - 0.5 * m * a.squaredNorm();
  };

  for (int outer = 0; outer < 200; ++outer) {
    mu = std::exp(nu);
    // Inner Newton solve at fixed μ.
    for (;;) {
      if (++iterations > options.max_iterations)
        throw SolverError("solve_mle: iteration cap reached");
      ChainTerms t = chain_terms(M * alpha, outcomes);
      grad = M.transpose() * t.slope - mu * alpha;
      neg_hess.noalias() = M.transpose() * t.weight.asDiagonal() * M;
      neg_hess.diagonal().array() += mu;
      llt.compute(neg_hess);
      if (llt.info() != Eigen::Success)
        throw SolverError("solve_mle: Newton system not positive definite");
      const Eigen::VectorXd step = llt.solve(grad);
      const double decrement = grad.dot(step);
      if (decrement <= 1e-24 ||
          grad.lpNorm<Eigen::Infinity>() <= 1e-3 * options.tolerance * mu)
        break;
      const double f0 = t.value - 0.5 * mu * alpha.squaredNorm();
      if (decrement <= 1e-14 * (1.0 + std::abs(f0))) {
        // Below the resolution of f: a line search cannot see progress, but
        // the full step is safe in the quadratic regime.
        alpha += step;
        break;
      }
      double tau = 1.0;
      Eigen::VectorXd trial = alpha + step;
      while (objective(trial, mu) < f0 + 1e-4 * tau * decrement &&
             tau > 1e-12) {
        tau *= 0.5;
        trial = alpha + tau * step;
      }
      alpha = trial;
    }

    const double norm = alpha.norm();
    const double psi = norm - B;
    if (std::abs(psi) <= 1e-11 * B) break;
    if (psi > 0.0)
      nu_lo = nu;
    else
      nu_hi = nu;
    // d‖α‖/dν = −μ αᵀ H⁻¹ α / ‖α‖ with H the negated Hessian.
    const double dpsi = -mu * alpha.dot(llt.solve(alpha)) / norm;
    double next = nu - psi / dpsi;
    if (!(next > nu_lo && next < nu_hi) || !std::isfinite(next)) {
      if (std::isinf(nu_lo))
        next = nu - 2.0;
      else if (std::isinf(nu_hi))
        next = nu + 2.0;
      else
        next = 0.5 * (nu_lo + nu_hi);
    }
    if (nu_hi - nu_lo <= 1e-14) break;
    nu = next;
  }

  const double norm = alpha.norm();
  if (norm > B) alpha *= B / norm;
  const ChainTerms t = chain_terms(M * alpha, outcomes);
  res.alpha = alpha;
  res.utilities = chol_lower.triangularView<Eigen::Lower>() * alpha;
  res.log_likelihood = t.value;
  res.multiplier = mu;
  res.optimality = (M.transpose() * t.slope - mu * alpha).norm();
  res.iterations = iterations;
  if (!(res.optimality <= options.tolerance * std::max(1.0, mu * B)) ||
      std::abs(alpha.norm() - B) > 1e-8 * B)
    throw SolverError("solve_mle: did not reach first-order optimality");
  return res;
}

double confidence_margin(const Eigen::VectorXd& utilities,
                         const PreferenceDataset& data,
                         const ConfidenceState& cs) {
  return log_likelihood(utilities, data) - (cs.ell_mle - cs.beta);
}

void write_dataset(std::ostream& out, const PreferenceDataset& data) {
  out << "# day theta1 theta2 z q\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const EvalPoint& p = data.points()[i];
    out << i << ' ' << format_double(p.theta.price_threshold) << ' '
        << format_double(p.theta.lower_setpoint) << ' '
        << format_double(p.context.mean_outdoor_temp) << ' ';
    if (i == 0)
      out << '-';
    else
      out << data.outcomes()[i - 1];
    out << '\n';
  }
}

PreferenceDataset read_dataset(std::istream& in) {
  std::vector<EvalPoint> points;
  std::vector<int> outcomes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_fields(line);
    if (f.size() != 5) throw IoError("dataset record: expected 5 fields");
    if (parse_int(f[0]) != static_cast<long long>(points.size()))
      throw IoError("dataset record: day indices must be consecutive");
    points.push_back({{parse_double(f[1]), parse_double(f[2])},
                      {parse_double(f[3])}});
    if (points.size() == 1) {
      if (f[4] != "-") throw IoError("dataset record: day 0 has no outcome");
    } else {
      outcomes.push_back(static_cast<int>(parse_int(f[4])));
    }
  }
  return PreferenceDataset(std::move(points), std::move(outcomes));
}

}  // namespace cpbo
