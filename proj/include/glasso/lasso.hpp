#pragma once

#include <functional>
#include <span>
#include <vector>

#include "glasso/sym_matrix.hpp"

namespace glasso {

// Inner-product form of the penalized least-squares subproblem
//   minimize  beta' V beta - beta' s12 + rho * ||beta||_1.
// V plays the held-out block of the working covariance (or of the empirical
// covariance in approximation mode). The subproblem is solved from V and s12
// directly; no square-root factor is ever formed.
struct LassoSubproblem {
  SymMatrix v{1};              // symmetric, strictly positive diagonal
  std::vector<double> s12;
  double rho = 0.0;
  std::vector<double> beta0;   // warm start; empty means zeros
};

struct LassoResult {
  std::vector<double> beta;
  int sweeps = 0;
  double max_delta = 0.0;  // largest coordinate change in the last sweep
  bool converged = false;
};

// Cyclic coordinate descent with the soft-threshold update
//   beta_j <- S(s12_j - 2 sum_{k!=j} V_kj beta_k, rho) / (2 V_jj),
// sweeping j = 0,1,...,m-1 until the largest coordinate change in a sweep
// is <= tol or max_sweeps is exhausted. On sweep exhaustion the best
// iterate is returned with converged = false.
//
// on_update, when set, is called after every single-coordinate update with
// the current coefficients (test instrumentation).
LassoResult lasso_cd_solve(
    const LassoSubproblem& prob, double tol, int max_sweeps,
    const std::function<void(std::span<const double>)>& on_update = {});

// Max-norm violation of the stationarity system 2 V beta - s12 + rho*nu = 0:
// per coordinate, |2(Vb)_j - s12_j + rho*sign(beta_j)| where beta_j != 0 and
// max(0, |2(Vb)_j - s12_j| - rho) where beta_j == 0.
double kkt_residual_inner(const LassoSubproblem& prob, std::span<const double> beta);

// Subproblem objective g(beta) = beta'V beta - beta's12 + rho*||beta||_1.
double lasso_objective(const LassoSubproblem& prob, std::span<const double> beta);

}  // namespace glasso
