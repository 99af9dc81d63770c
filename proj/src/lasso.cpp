#include "glasso/lasso.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "glasso/errors.hpp"

namespace glasso {

namespace {

void check_problem(const LassoSubproblem& prob) {
  const std::size_t m = prob.s12.size();
  if (prob.v.dim() != m)
    throw std::invalid_argument("lasso: V and s12 dimensions disagree");
  if (!prob.beta0.empty() && prob.beta0.size() != m)
    throw std::invalid_argument("lasso: warm start dimension disagrees");
  if (prob.rho < 0.0) throw std::invalid_argument("lasso: rho must be >= 0");
  for (std::size_t j = 0; j < m; ++j)
    if (!(prob.v(j, j) > 0.0))
      throw InvalidDiagonal("lasso: V has non-positive diagonal at " + std::to_string(j), j);
}

}  // namespace

LassoResult lasso_cd_solve(const LassoSubproblem& prob, double tol, int max_sweeps,
                           const std::function<void(std::span<const double>)>& on_update) {
  check_problem(prob);
  if (!(tol > 0.0)) throw std::invalid_argument("lasso: tol must be > 0");
  if (max_sweeps < 1) throw std::invalid_argument("lasso: max_sweeps must be >= 1");

  const std::size_t m = prob.s12.size();
  const SymMatrix& v = prob.v;

  LassoResult res;
  res.beta = prob.beta0.empty() ? std::vector<double>(m, 0.0) : prob.beta0;

  // u = V * beta, maintained incrementally; an update of beta_j costs O(m)
  // only when beta_j actually moves. Warm starts are usually sparse, so the
  // initial product accumulates nonzero rows only.
  std::vector<double> u(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double bj = res.beta[j];
    if (bj == 0.0) continue;
    const double* vrow = v.row(j);
    for (std::size_t k = 0; k < m; ++k) u[k] += bj * vrow[k];
  }

  while (res.sweeps < max_sweeps) {
    double sweep_delta = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double vjj = v(j, j);
      const double old = res.beta[j];
      const double arg = prob.s12[j] - 2.0 * (u[j] - vjj * old);
      const double next = soft_threshold(arg, prob.rho) / (2.0 * vjj);
      const double d = next - old;
      if (d != 0.0) {
        res.beta[j] = next;
        const double* vrow = v.row(j);
        for (std::size_t k = 0; k < m; ++k) u[k] += d * vrow[k];
        const double ad = std::abs(d);
        if (ad > sweep_delta) sweep_delta = ad;
      }
      if (on_update) on_update(res.beta);
    }
    ++res.sweeps;
    res.max_delta = sweep_delta;
    if (sweep_delta <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double kkt_residual_inner(const LassoSubproblem& prob, std::span<const double> beta) {
  const std::size_t m = prob.s12.size();
  if (beta.size() != m || prob.v.dim() != m)
    throw std::invalid_argument("kkt_residual_inner: dimension mismatch");
  const std::vector<double> u = sym_matvec(prob.v, beta);
  double worst = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double g = 2.0 * u[j] - prob.s12[j];
    double r;
    if (beta[j] != 0.0)
      r = std::abs(g + (beta[j] > 0.0 ? prob.rho : -prob.rho));
    else
      r = std::max(0.0, std::abs(g) - prob.rho);
    if (r > worst) worst = r;
  }
  return worst;
}

double lasso_objective(const LassoSubproblem& prob, std::span<const double> beta) {
  const std::size_t m = prob.s12.size();
  if (beta.size() != m || prob.v.dim() != m)
    throw std::invalid_argument("lasso_objective: dimension mismatch");
  const std::vector<double> u = sym_matvec(prob.v, beta);
  double quad = 0.0, lin = 0.0, l1 = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    quad += beta[j] * u[j];
    lin += beta[j] * prob.s12[j];
    l1 += std::abs(beta[j]);
  }
  return quad - lin + prob.rho * l1;
}

}  // namespace glasso
