#include "cpbo/lp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "cpbo/errors.hpp"
#include "cpbo/table_io.hpp"

namespace cpbo {

void LpProblem::validate() const {
  const Eigen::Index n = c.size();
  if (A.cols() != n || G.cols() != n)
    throw DimensionError("lp: constraint matrices do not match c");
  if (A.rows() != b.size() || G.rows() != h.size())
    throw DimensionError("lp: right-hand sides do not match constraint rows");
  if (lower.size() != n || upper.size() != n)
    throw DimensionError("lp: bound vectors do not match c");
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(lower[j] <= upper[j]) || lower[j] == upper[j])
      throw DimensionError("lp: empty or degenerate box for variable " +
                           std::to_string(j));
  if (!c.allFinite() || !b.allFinite() || !h.allFinite())
    throw DimensionError("lp: non-finite data");
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::numerical_failure:
      return "numerical-failure";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max({primal, dual, complementarity});
}

KktResiduals kkt_residuals(const LpProblem& p, const LpSolution& s) {
  KktResiduals r;
  const Eigen::VectorXd& x = s.x;
  if (p.A.rows() > 0) r.primal = (p.A * x - p.b).lpNorm<Eigen::Infinity>();
  Eigen::VectorXd gap = p.h;
  if (p.G.rows() > 0) gap -= p.G * x;
  for (Eigen::Index i = 0; i < gap.size(); ++i) {
    r.primal = std::max(r.primal, -gap[i]);
    r.complementarity = std::max(r.complementarity, std::abs(s.ineq_dual[i] * gap[i]));
    r.dual = std::max(r.dual, -s.ineq_dual[i]);
  }
  Eigen::VectorXd stat = p.c - s.lower_dual + s.upper_dual;
  if (p.A.rows() > 0) stat += p.A.transpose() * s.eq_dual;
  if (p.G.rows() > 0) stat += p.G.transpose() * s.ineq_dual;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::isfinite(p.lower[j])) {
      r.primal = std::max(r.primal, p.lower[j] - x[j]);
      r.complementarity =
          std::max(r.complementarity, std::abs(s.lower_dual[j] * (x[j] - p.lower[j])));
    } else {
      r.dual = std::max(r.dual, std::abs(s.lower_dual[j]));
    }
    if (std::isfinite(p.upper[j])) {
      r.primal = std::max(r.primal, x[j] - p.upper[j]);
      r.complementarity =
          std::max(r.complementarity, std::abs(s.upper_dual[j] * (p.upper[j] - x[j])));
    } else {
      r.dual = std::max(r.dual, std::abs(s.upper_dual[j]));
    }
    r.dual = std::max({r.dual, -s.lower_dual[j], -s.upper_dual[j]});
  }
  r.dual = std::max(r.dual, stat.lpNorm<Eigen::Infinity>());
  return r;
}

namespace {

// Augmented matrix
//   [ D + δI   Aᵀ     Gᵀ          ]
//   [ A        −δI    0           ]
//   [ G        0      −S/Z − δI   ]
// (lower triangle stored). Keeping G in the matrix instead of forming GᵀWG
// avoids cancellation between huge and tiny weights late in the solve. The
// pattern is fixed, so the symbolic analysis is done once.
class KktSystem {
 public:
  explicit KktSystem(const LpProblem& p)
      : n_(p.num_variables()), me_(p.A.rows()), mg_(p.G.rows()) {
    const Eigen::Index dim = n_ + me_ + mg_;
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index j = 0; j < dim; ++j) trip.emplace_back(j, j, 0.0);
    auto add_block = [&](const Eigen::SparseMatrix<double>& M, Eigen::Index offset) {
      for (Eigen::Index c = 0; c < M.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(M, c); it; ++it)
          trip.emplace_back(offset + it.row(), it.col(), it.value());
    };
    add_block(p.A, n_);
    add_block(p.G, n_ + me_);
    K_.resize(dim, dim);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();
    diag_pos_.resize(static_cast<std::size_t>(dim));
    for (Eigen::Index j = 0; j < dim; ++j) diag_pos_[static_cast<std::size_t>(j)] = position(j, j);
    ldlt_.analyzePattern(K_);
  }

  bool factorize(const Eigen::VectorXd& var_weight, const Eigen::VectorXd& row_inv_weight,
                 double primal_reg, double dual_reg) {
    double* v = K_.valuePtr();
    for (Eigen::Index j = 0; j < n_; ++j) v[diag(j)] = var_weight[j] + primal_reg;
    for (Eigen::Index r = 0; r < me_; ++r) v[diag(n_ + r)] = -dual_reg;
    for (Eigen::Index r = 0; r < mg_; ++r) v[diag(n_ + me_ + r)] = -row_inv_weight[r] - dual_reg;
    ldlt_.factorize(K_);
    if (ldlt_.info() != Eigen::Success) return false;
    full_ = K_.selfadjointView<Eigen::Lower>();
    return ldlt_.vectorD().allFinite();
  }

  // Solves with iterative refinement against the matrix without the dual
  // regularization; the primal one is removed too unless `proximal`, in which
  // case it stays as a proximal term of the step. Returns false unless every
  // block of the residual (dual rows, equality rows, inequality rows) falls
  // below `rel_tol` relative to its right-hand side.
  bool solve(const Eigen::VectorXd& rhs, double primal_reg, double dual_reg, bool proximal,
             Eigen::VectorXd& sol, double rel_tol = 1e-9) const {
    const Eigen::Index off[4] = {0, n_, n_ + me_, n_ + me_ + mg_};
    double scale[3];
    for (int b = 0; b < 3; ++b)
      scale[b] = 1.0 + (off[b + 1] > off[b]
                            ? rhs.segment(off[b], off[b + 1] - off[b]).lpNorm<Eigen::Infinity>()
                            : 0.0);
    auto worst = [&](const Eigen::VectorXd& res) {
      double w = 0.0;
      for (int b = 0; b < 3; ++b)
        if (off[b + 1] > off[b])
          w = std::max(w, res.segment(off[b], off[b + 1] - off[b]).lpNorm<Eigen::Infinity>() /
                              scale[b]);
      return w;
    };
    sol = ldlt_.solve(rhs);
    double err = 0.0;
    for (int it = 0; it < 8; ++it) {
      Eigen::VectorXd res = rhs - full_ * sol;
      if (!proximal) res.head(n_) += primal_reg * sol.head(n_);
      res.tail(me_ + mg_) -= dual_reg * sol.tail(me_ + mg_);
      err = worst(res);
      if (!std::isfinite(err) || !sol.allFinite()) return false;
      if (err <= 1e-2 * rel_tol) return true;
      sol += ldlt_.solve(res);
    }
    return err <= rel_tol;
  }

 private:
  Eigen::Index diag(Eigen::Index j) const { return diag_pos_[static_cast<std::size_t>(j)]; }

  Eigen::Index position(Eigen::Index row, Eigen::Index col) const {
    const int* outer = K_.outerIndexPtr();
    const int* inner = K_.innerIndexPtr();
    for (int k = outer[col]; k < outer[col + 1]; ++k)
      if (inner[k] == row) return k;
    throw SolverError("lp: internal sparsity pattern error");
  }

  Eigen::Index n_, me_, mg_;
  Eigen::SparseMatrix<double> K_;
  Eigen::SparseMatrix<double> full_;
  std::vector<Eigen::Index> diag_pos_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
};

struct Direction {
  Eigen::VectorXd dx, dy, ds, dz, dwl, dwu;
};

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

}  // namespace

LpSolution solve_lp(const LpProblem& p, const LpOptions& options) {
  p.validate();
  const Eigen::Index n = p.num_variables();
  const Eigen::Index me = p.A.rows();
  const Eigen::Index mg = p.G.rows();

  Eigen::VectorXd has_l(n), has_u(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    has_l[j] = std::isfinite(p.lower[j]) ? 1.0 : 0.0;
    has_u[j] = std::isfinite(p.upper[j]) ? 1.0 : 0.0;
  }
  const double bounded_count = has_l.sum() + has_u.sum();
  const double m_total = static_cast<double>(mg) + bounded_count;
  const double cnorm = p.c.lpNorm<Eigen::Infinity>();
  const double bnorm = me > 0 ? p.b.lpNorm<Eigen::Infinity>() : 0.0;
  const double hnorm = mg > 0 ? p.h.lpNorm<Eigen::Infinity>() : 0.0;

  Eigen::VectorXd x(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double l = p.lower[j], u = p.upper[j];
    if (has_l[j] && has_u[j])
      x[j] = 0.5 * (l + u);
    else if (has_l[j])
      x[j] = l + 1.0;
    else if (has_u[j])
      x[j] = u - 1.0;
    else
      x[j] = 0.0;
  }
  const double dual0 = 1.0 + std::sqrt(cnorm);
  Eigen::VectorXd s = (p.h - p.G * x).cwiseMax(1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Constant(mg, dual0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
  Eigen::VectorXd wl = has_l * dual0;
  Eigen::VectorXd wu = has_u * dual0;

  auto gaps = [&](const Eigen::VectorXd& xv, Eigen::VectorXd& tl, Eigen::VectorXd& tu) {
    tl.resize(n);
    tu.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      tl[j] = has_l[j] ? xv[j] - p.lower[j] : 1.0;
      tu[j] = has_u[j] ? p.upper[j] - xv[j] : 1.0;
    }
  };

  KktSystem kkt(p);
  LpSolution sol;
  sol.status = LpStatus::numerical_failure;
  constexpr double kBaseReg = 1e-11;
  constexpr int kRegLevels = 4;  // 1e-11 … 1e-5
  constexpr int kMaxInexactSteps = 10;
  double reg = kBaseReg, dual_reg = kBaseReg;
  bool proximal = false;
  int inexact_steps = 0;
  Eigen::VectorXd tl, tu;
  Eigen::VectorXd row_inv_weight(mg), var_weight(n), rhs(n + me + mg);

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    gaps(x, tl, tu);
    const Eigen::VectorXd rd = p.c + p.A.transpose() * y + p.G.transpose() * z - wl + wu;
    const Eigen::VectorXd rp = p.A * x - p.b;
    const Eigen::VectorXd rg = p.G * x + s - p.h;
    double mu = s.dot(z);
    for (Eigen::Index j = 0; j < n; ++j) mu += has_l[j] * tl[j] * wl[j] + has_u[j] * tu[j] * wu[j];
    mu = m_total > 0 ? mu / m_total : 0.0;

    const double ep = me > 0 ? rp.lpNorm<Eigen::Infinity>() / (1.0 + bnorm) : 0.0;
    const double eg = mg > 0 ? rg.lpNorm<Eigen::Infinity>() / (1.0 + hnorm) : 0.0;
    const double ed = rd.lpNorm<Eigen::Infinity>() / (1.0 + cnorm);
    if (ep <= options.tolerance && eg <= options.tolerance &&
        ed <= options.tolerance && mu <= options.tolerance) {
      sol.status = LpStatus::optimal;
      break;
    }
    if (!std::isfinite(mu) || mu > 1e30) break;

    for (Eigen::Index i = 0; i < mg; ++i) row_inv_weight[i] = s[i] / z[i];
    for (Eigen::Index j = 0; j < n; ++j)
      var_weight[j] = has_l[j] * wl[j] / tl[j] + has_u[j] * wu[j] / tu[j];
    const Eigen::VectorXd sz = s.cwiseProduct(z);
    const Eigen::VectorXd lw = tl.cwiseProduct(wl).cwiseProduct(has_l);
    const Eigen::VectorXd uw = tu.cwiseProduct(wu).cwiseProduct(has_u);

    // rsz = s∘z − target, rl = tl∘wl − target, ru = tu∘wu − target.
    bool accurate = true;
    auto direction = [&](const Eigen::VectorXd& rsz, const Eigen::VectorXd& rl,
                         const Eigen::VectorXd& ru) {
      Direction d;
      rhs.head(n) = -rd;
      for (Eigen::Index j = 0; j < n; ++j)
        rhs[j] += -has_l[j] * rl[j] / tl[j] + has_u[j] * ru[j] / tu[j];
      rhs.segment(n, me) = -rp;
      rhs.tail(mg) = -rg + rsz.cwiseQuotient(z);
      Eigen::VectorXd sol_v;
      if (!kkt.solve(rhs, reg, dual_reg, proximal, sol_v)) accurate = false;
      d.dx = sol_v.head(n);
      d.dy = sol_v.segment(n, me);
      d.dz = sol_v.tail(mg);
      d.ds = -rg - p.G * d.dx;
      d.dwl.resize(n);
      d.dwu.resize(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        d.dwl[j] = has_l[j] ? (-rl[j] - wl[j] * d.dx[j]) / tl[j] : 0.0;
        d.dwu[j] = has_u[j] ? (-ru[j] + wu[j] * d.dx[j]) / tu[j] : 0.0;
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d, double& ap, double& ad) {
      ap = max_step(s, d.ds);
      ad = max_step(z, d.dz);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (has_l[j] && d.dx[j] < 0.0) ap = std::min(ap, -tl[j] / d.dx[j]);
        if (has_u[j] && d.dx[j] > 0.0) ap = std::min(ap, tu[j] / d.dx[j]);
        if (has_l[j] && d.dwl[j] < 0.0) ad = std::min(ad, -wl[j] / d.dwl[j]);
        if (has_u[j] && d.dwu[j] < 0.0) ad = std::min(ad, -wu[j] / d.dwu[j]);
      }
    };

    // Near the end the weights span ~30 orders of magnitude; a pivot can
    // cancel to zero or a variable whose constraints are all inactive can
    // leave the matrix nearly singular. Retry with heavier regularization,
    // alternating between regularizing both blocks and regularizing only the
    // primal block, kept in the step as a proximal term.
    Direction d;
    double ap = 0.0, ad = 0.0;
    bool ok = false, have = false;
    for (int level = 0; level < 2 * kRegLevels - 1 && !ok; ++level) {
      reg = kBaseReg * std::pow(1e2, (level + 1) / 2);
      proximal = level % 2 == 0 && level > 0;
      dual_reg = proximal ? kBaseReg : reg;
      if (!kkt.factorize(var_weight, row_inv_weight, reg, dual_reg)) continue;
      have = true;
      accurate = true;
      const Direction aff = direction(sz, lw, uw);
      step_lengths(aff, ap, ad);
      double mu_aff = (s + ap * aff.ds).dot(z + ad * aff.dz);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (has_l[j]) mu_aff += (tl[j] + ap * aff.dx[j]) * (wl[j] + ad * aff.dwl[j]);
        if (has_u[j]) mu_aff += (tu[j] - ap * aff.dx[j]) * (wu[j] + ad * aff.dwu[j]);
      }
      mu_aff /= m_total;
      const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
      const double target = sigma * mu;

      const Eigen::VectorXd rsz = (sz + aff.ds.cwiseProduct(aff.dz)).array() - target;
      Eigen::VectorXd rl(n), ru(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        rl[j] = has_l[j] ? lw[j] + aff.dx[j] * aff.dwl[j] - target : 0.0;
        ru[j] = has_u[j] ? uw[j] - aff.dx[j] * aff.dwu[j] - target : 0.0;
      }
      d = direction(rsz, rl, ru);
      ok = accurate;
    }
    // Without an accurate solve the heavily regularized direction is still a
    // usable inexact Newton step; give up only if that keeps happening.
    if (!ok && (!have || ++inexact_steps > kMaxInexactSteps)) break;
    if (!d.dx.allFinite() || !d.dz.allFinite() || !d.dy.allFinite() || !d.dwl.allFinite() ||
        !d.dwu.allFinite())
      break;
    step_lengths(d, ap, ad);
    ap = std::min(1.0, 0.995 * ap);
    ad = std::min(1.0, 0.995 * ad);
    x += ap * d.dx;
    s += ap * d.ds;
    y += ad * d.dy;
    z += ad * d.dz;
    wl += ad * d.dwl;
    wu += ad * d.dwu;
    if (!x.allFinite() || !z.allFinite() || !y.allFinite()) break;
    if (y.lpNorm<Eigen::Infinity>() > 1e14 || z.lpNorm<Eigen::Infinity>() > 1e14) {
      // Dual ray growing without primal progress.
      sol.status = LpStatus::infeasible;
      break;
    }
  }

  sol.iterations = iter;
  sol.x = x;
  sol.eq_dual = y;
  sol.ineq_dual = z;
  sol.lower_dual = wl;
  sol.upper_dual = wu;
  sol.objective = p.c.dot(x);
  sol.residuals = kkt_residuals(p, sol);
  const bool within_limits = sol.residuals.primal <= options.primal_limit &&
                             sol.residuals.dual <= options.kkt_limit &&
                             sol.residuals.complementarity <= options.kkt_limit;
  // A breakdown after the point already certifies optimality is not a failure.
  if (sol.status == LpStatus::numerical_failure && within_limits)
    sol.status = LpStatus::optimal;
  if (sol.status == LpStatus::optimal &&
      (sol.residuals.primal > options.primal_limit ||
       sol.residuals.dual > options.kkt_limit ||
       sol.residuals.complementarity > options.kkt_limit))
    sol.status = LpStatus::numerical_failure;
  if (sol.status == LpStatus::numerical_failure && iter == options.max_iterations) {
    const double ep = me > 0 ? (p.A * x - p.b).lpNorm<Eigen::Infinity>() : 0.0;
    if (ep > 1e-6 * (1.0 + bnorm) && z.lpNorm<Eigen::Infinity>() > 1e10)
      sol.status = LpStatus::infeasible;
  }
  return sol;
}

void dump_lp(std::ostream& out, const LpProblem& p) {
  out << "lp " << p.num_variables() << ' ' << p.A.rows() << ' ' << p.G.rows() << '\n';
  for (Eigen::Index j = 0; j < p.num_variables(); ++j)
    out << "var " << j << ' ' << format_double(p.c[j]) << ' '
        << format_double(p.lower[j]) << ' ' << format_double(p.upper[j]) << '\n';
  auto rows = [&](const char* tag, const Eigen::SparseMatrix<double>& M,
                  const Eigen::VectorXd& rhs) {
    const Eigen::SparseMatrix<double, Eigen::RowMajor> R = M;
    for (Eigen::Index r = 0; r < R.rows(); ++r) {
      out << tag << ' ' << r << ' ' << format_double(rhs[r]);
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(R, r); it; ++it)
        out << ' ' << it.col() << ':' << format_double(it.value());
      out << '\n';
    }
  };
  rows("eq", p.A, p.b);
  rows("le", p.G, p.h);
}

LpProblem read_lp_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("lp dump: empty input");
  auto head = split_fields(line);
  if (head.size() != 4 || head[0] != "lp") throw IoError("lp dump: bad header");
  const Eigen::Index n = parse_int(head[1]), me = parse_int(head[2]), mg = parse_int(head[3]);
  LpProblem p;
  p.c.resize(n);
  p.lower.resize(n);
  p.upper.resize(n);
  p.b.resize(me);
  p.h.resize(mg);
  std::vector<Eigen::Triplet<double>> ta, tg;
  auto parse_bound = [](const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return parse_double(s);
  };
  while (std::getline(in, line)) {
    auto f = split_fields(line);
    if (f.empty()) continue;
    const Eigen::Index idx = parse_int(f.at(1));
    if (f[0] == "var") {
      if (f.size() != 5 || idx >= n) throw IoError("lp dump: bad var line");
      p.c[idx] = parse_double(f[2]);
      p.lower[idx] = parse_bound(f[3]);
      p.upper[idx] = parse_bound(f[4]);
    } else if (f[0] == "eq" || f[0] == "le") {
      auto& trip = f[0] == "eq" ? ta : tg;
      (f[0] == "eq" ? p.b : p.h)[idx] = parse_double(f.at(2));
      for (std::size_t k = 3; k < f.size(); ++k) {
        const auto colon = f[k].find(':');
        if (colon == std::string::npos) throw IoError("lp dump: bad coefficient");
        trip.emplace_back(idx, parse_int(std::string_view(f[k]).substr(0, colon)),
                          parse_double(std::string_view(f[k]).substr(colon + 1)));
      }
    } else {
      throw IoError("lp dump: unknown record '" + f[0] + "'");
    }
  }
  p.A.resize(me, n);
  p.A.setFromTriplets(ta.begin(), ta.end());
  p.G.resize(mg, n);
  p.G.setFromTriplets(tg.begin(), tg.end());
  return p;
}

}  // namespace cpbo
