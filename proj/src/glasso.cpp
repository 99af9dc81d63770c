#include "glasso/glasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "glasso/errors.hpp"
#include "glasso/lasso.hpp"

namespace glasso {

namespace {

constexpr int kInnerMaxSweeps = 1000;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_inputs(const SymMatrix& s, const GlassoConfig& cfg) {
  if (cfg.rho < 0.0) throw std::invalid_argument("glasso: rho must be >= 0");
  if (!(cfg.outer_tol > 0.0)) throw std::invalid_argument("glasso: outer_tol must be > 0");
  if (cfg.max_outer_sweeps < 1) throw std::invalid_argument("glasso: max_outer_sweeps must be >= 1");
  if (cfg.mode == Mode::InvertOnly && cfg.rho != 0.0)
    throw std::invalid_argument("glasso: InvertOnly requires rho = 0");
  for (std::size_t i = 0; i < s.dim(); ++i)
    if (!(s(i, i) > 0.0))
      throw InvalidDiagonal("glasso: S has non-positive diagonal at " + std::to_string(i), i);
}

SymMatrix with_ridge(const SymMatrix& s, double rho) {
  SymMatrix w = s;
  for (std::size_t i = 0; i < w.dim(); ++i) w.set(i, i, s(i, i) + rho);
  return w;
}

// The coefficient criterion is scale-free, so outer_tol/10 is right for
// unit-variance data; divide by the largest diagonal so the write-back
// residual stays proportionate when variances are large.
double inner_tolerance(const SymMatrix& s, const GlassoConfig& cfg) {
  double diag_max = 0.0;
  for (std::size_t i = 0; i < s.dim(); ++i) diag_max = std::max(diag_max, s(i, i) + cfg.rho);
  return (cfg.outer_tol / 10.0) / std::max(1.0, diag_max);
}

GlassoSolution trivial_univariate(const SymMatrix& s, const GlassoConfig& cfg) {
  GlassoSolution sol;
  sol.rho = cfg.rho;
  sol.mode = cfg.mode;
  sol.w = with_ridge(s, cfg.rho);
  sol.theta = SymMatrix(1);
  sol.theta.set(0, 0, 1.0 / sol.w(0, 0));
  sol.b = Matrix(1, 1, 0.0);
  sol.outer_sweeps = cfg.mode == Mode::Exact ? 0 : 1;
  sol.converged = true;
  return sol;
}

GlassoSolution exact_fit(const SymMatrix& s, const GlassoConfig& cfg, const GlassoSolution* warm) {
  const std::size_t p = s.dim();
  const SymMatrix w0 = with_ridge(s, cfg.rho);
  { Cholesky pd_check(w0); }  // rejects rho = 0 with singular S before iterating

  if (p == 1) return trivial_univariate(s, cfg);

  GlassoSolution sol;
  sol.rho = cfg.rho;
  sol.mode = Mode::Exact;
  if (warm != nullptr) {
    if (warm->w.dim() != p || warm->b.rows() != p || warm->b.cols() != p)
      throw std::invalid_argument("glasso: warm start dimension mismatch");
    sol.w = warm->w;
    for (std::size_t i = 0; i < p; ++i) sol.w.set(i, i, s(i, i) + cfg.rho);
    sol.b = warm->b;
  } else {
    sol.w = w0;
    sol.b = Matrix(p, p, 0.0);
  }

  const double threshold = cfg.outer_tol * mean_abs_offdiag(s);
  const double inner_tol = inner_tolerance(s, cfg);

  std::vector<double> beta0(p - 1);
  for (int sweep = 0; sweep < cfg.max_outer_sweeps; ++sweep) {
    double change_sum = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      Partition part = extract_partition(sol.w, j);

      LassoSubproblem sub;
      sub.v = std::move(part.block11);
      sub.s12 = column_without(s, j);
      sub.rho = cfg.rho;
      for (std::size_t r = 0; r < p - 1; ++r) beta0[r] = sol.b(r < j ? r : r + 1, j);
      sub.beta0 = beta0;

      const LassoResult res = lasso_cd_solve(sub, inner_tol, kInnerMaxSweeps);

      // w12 = 2 V beta; r nonzeros cost r*(p-1) operations.
      std::vector<double> w12(p - 1, 0.0);
      for (std::size_t k = 0; k < p - 1; ++k) {
        const double bk = res.beta[k];
        if (bk == 0.0) continue;
        const double* vrow = sub.v.row(k);
        for (std::size_t r = 0; r < p - 1; ++r) w12[r] += bk * vrow[r];
      }
      for (std::size_t r = 0; r < p - 1; ++r) {
        w12[r] *= 2.0;
        change_sum += std::abs(w12[r] - part.vec12[r]);
      }

      part.vec12 = std::move(w12);
      insert_partition(part, j, sol.w);
      for (std::size_t r = 0; r < p - 1; ++r) sol.b(r < j ? r : r + 1, j) = res.beta[r];
    }
    ++sol.outer_sweeps;
    sol.final_change = change_sum / static_cast<double>(p * (p - 1));
    if (sol.final_change <= threshold) {
      sol.converged = true;
      break;
    }
  }

  sol.theta = theta_recover(sol.w, sol.b);
  return sol;
}

GlassoSolution invert_fit(const SymMatrix& s, const GlassoConfig& cfg) {
  const std::size_t p = s.dim();
  { Cholesky pd_check(s); }

  if (p == 1) return trivial_univariate(s, cfg);

  GlassoSolution sol;
  sol.rho = 0.0;
  sol.mode = Mode::InvertOnly;
  sol.w = s;
  sol.b = Matrix(p, p, 0.0);

  // With rho = 0 and W = S the write-back w = 2 S11 beta reproduces s12,
  // so the single sweep only needs the regression coefficients.
  for (std::size_t j = 0; j < p; ++j) {
    Partition part = extract_partition(s, j);
    const Cholesky block(part.block11);
    const std::vector<double> x = block.solve(part.vec12);
    for (std::size_t r = 0; r < p - 1; ++r) sol.b(r < j ? r : r + 1, j) = 0.5 * x[r];
  }

  sol.theta = theta_recover(sol.w, sol.b);
  sol.outer_sweeps = 1;
  sol.converged = true;
  return sol;
}

}  // namespace

GlassoSolution glasso_fit(const SymMatrix& s, const GlassoConfig& cfg, const GlassoSolution* warm) {
  check_inputs(s, cfg);
  switch (cfg.mode) {
    case Mode::Exact:
      return exact_fit(s, cfg, warm);
    case Mode::InvertOnly:
      return invert_fit(s, cfg);
    case Mode::MBor:
    case Mode::MBand:
      return mb_fit(s, cfg);
  }
  throw std::invalid_argument("glasso: unknown mode");
}

GlassoSolution mb_fit(const SymMatrix& s, const GlassoConfig& cfg) {
  if (cfg.mode != Mode::MBor && cfg.mode != Mode::MBand)
    throw std::invalid_argument("mb_fit: mode must be MBor or MBand");
  check_inputs(s, cfg);

  const std::size_t p = s.dim();
  const SymMatrix w0 = with_ridge(s, cfg.rho);
  { Cholesky pd_check(w0); }

  if (p == 1) return trivial_univariate(s, cfg);

  GlassoSolution sol;
  sol.rho = cfg.rho;
  sol.mode = cfg.mode;
  sol.w = w0;
  sol.b = Matrix(p, p, 0.0);

  const double inner_tol = inner_tolerance(s, cfg);

  // Single pass of independent subproblems against the frozen block S11.
  bool all_converged = true;
  for (std::size_t j = 0; j < p; ++j) {
    Partition part = extract_partition(s, j);
    LassoSubproblem sub;
    sub.v = std::move(part.block11);
    sub.s12 = column_without(s, j);
    sub.rho = cfg.rho;
    const LassoResult res = lasso_cd_solve(sub, inner_tol, kInnerMaxSweeps);
    all_converged = all_converged && res.converged;
    for (std::size_t r = 0; r < p - 1; ++r) sol.b(r < j ? r : r + 1, j) = res.beta[r];
  }

  // AND rule keeps a coefficient only when its mirror is nonzero too; the
  // OR rule needs no masking since recovery averages the two columns.
  if (cfg.mode == Mode::MBand) {
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j)
        if (sol.b(i, j) == 0.0 || sol.b(j, i) == 0.0) {
          sol.b(i, j) = 0.0;
          sol.b(j, i) = 0.0;
        }
  }

  // Same write-back as the exact sweep, with V = S11.
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> w12(p - 1, 0.0);
    for (std::size_t k = 0; k < p - 1; ++k) {
      const std::size_t sk = k < j ? k : k + 1;
      const double bk = sol.b(sk, j);
      if (bk == 0.0) continue;
      const double* srow = s.row(sk);
      for (std::size_t r = 0; r < p - 1; ++r) w12[r] += bk * srow[r < j ? r : r + 1];
    }
    Partition wcol;
    wcol.target = j;
    for (std::size_t r = 0; r < p - 1; ++r) w12[r] *= 2.0;
    wcol.vec12 = std::move(w12);
    wcol.scalar22 = s(j, j) + cfg.rho;
    insert_partition(wcol, j, sol.w);
  }

  sol.theta = theta_recover(sol.w, sol.b);
  sol.outer_sweeps = 1;
  sol.converged = all_converged;
  sol.final_change = 0.0;
  return sol;
}

SymMatrix theta_recover(const SymMatrix& w, const Matrix& b) {
  const std::size_t p = w.dim();
  if (b.rows() != p || b.cols() != p)
    throw std::invalid_argument("theta_recover: W and B dimensions disagree");

  Matrix raw(p, p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double dot = 0.0;
    const double* wcol = w.row(j);
    for (std::size_t k = 0; k < p; ++k)
      if (k != j) dot += b(k, j) * wcol[k];
    const double denom = w(j, j) - 2.0 * dot;
    if (!(denom > 0.0))
      throw NonPositivePivot("theta_recover: non-positive denominator at column " + std::to_string(j), j);
    const double tjj = 1.0 / denom;
    raw(j, j) = tjj;
    for (std::size_t k = 0; k < p; ++k)
      if (k != j) raw(k, j) = -2.0 * tjj * b(k, j);
  }

  // Column formulas leave tiny asymmetries at finite tolerance; average.
  SymMatrix theta(p);
  for (std::size_t i = 0; i < p; ++i) {
    theta.set(i, i, raw(i, i));
    for (std::size_t j = i + 1; j < p; ++j) theta.set(i, j, 0.5 * (raw(i, j) + raw(j, i)));
  }
  return theta;
}

KKTReport kkt_check(const SymMatrix& s, const GlassoSolution& sol, double eps) {
  const std::size_t p = s.dim();
  if (sol.w.dim() != p || sol.theta.dim() != p)
    throw std::invalid_argument("kkt_check: dimension mismatch");
  if (!(eps > 0.0)) throw std::invalid_argument("kkt_check: eps must be > 0");

  const double rho = sol.rho;
  const double ztol = default_zero_tol(sol.theta);

  KKTReport rep;
  rep.gamma = SymMatrix(p);
  for (std::size_t i = 0; i < p; ++i) {
    rep.gamma.set(i, i, 1.0);
    rep.max_sign_violation = std::max(rep.max_sign_violation, std::abs(sol.w(i, i) - s(i, i) - rho));
    for (std::size_t j = i + 1; j < p; ++j) {
      const double d = sol.w(i, j) - s(i, j);
      rep.gamma.set(i, j, rho > 0.0 ? d / rho : sgn(sol.theta(i, j)));
      if (std::abs(sol.theta(i, j)) > ztol) {
        rep.max_sign_violation =
            std::max(rep.max_sign_violation, std::abs(d - rho * sgn(sol.theta(i, j))));
      } else {
        rep.max_offdiag_violation = std::max(rep.max_offdiag_violation, std::abs(d) - rho);
      }
    }
  }
  rep.max_offdiag_violation = std::max(rep.max_offdiag_violation, 0.0);
  rep.passed = rep.max_sign_violation <= eps && rep.max_offdiag_violation <= eps;
  return rep;
}

std::vector<Edge> edge_set(const SymMatrix& theta, double zero_tol) {
  if (zero_tol < 0.0) throw std::invalid_argument("edge_set: zero_tol must be >= 0");
  std::vector<Edge> edges;
  const std::size_t p = theta.dim();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (std::abs(theta(i, j)) > zero_tol) edges.emplace_back(i, j);
  return edges;
}

double default_zero_tol(const SymMatrix& theta) {
  double diag_max = 0.0;
  for (std::size_t i = 0; i < theta.dim(); ++i) diag_max = std::max(diag_max, theta(i, i));
  return 1e-8 * diag_max;
}

double max_abs_offdiag(const SymMatrix& m) {
  double worst = 0.0;
  const std::size_t p = m.dim();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) worst = std::max(worst, std::abs(m(i, j)));
  return worst;
}

double mean_abs_offdiag(const SymMatrix& m) {
  const std::size_t p = m.dim();
  if (p < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) sum += std::abs(m(i, j));
  return 2.0 * sum / static_cast<double>(p * (p - 1));
}

}  // namespace glasso
