#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "glasso/sym_matrix.hpp"

namespace glasso {

// Exact: block coordinate descent over columns of W until convergence.
// MBor / MBand: single-pass neighborhood-selection approximation with the
//   held-out block frozen at the empirical covariance, supports combined by
//   the OR / AND rule.
// InvertOnly: rho = 0 special case; one sweep of exact regressions inverts
//   the input matrix through the same recovery formulas.
enum class Mode { Exact, MBor, MBand, InvertOnly };

struct GlassoConfig {
  double rho = 0.0;
  double outer_tol = 1e-4;
  int max_outer_sweeps = 100;
  Mode mode = Mode::Exact;
};

struct GlassoSolution {
  SymMatrix w{1};      // covariance estimate; diagonal pinned to s_ii + rho
  SymMatrix theta{1};  // precision estimate
  Matrix b;            // p x p; column j holds that column's coefficients, diagonal 0
  double rho = 0.0;
  Mode mode = Mode::Exact;
  int outer_sweeps = 0;
  bool converged = false;
  double final_change = 0.0;  // mean |dW| over the last sweep
};

// Subgradient verification report for W - S - rho*Gamma = 0.
struct KKTReport {
  SymMatrix gamma{1};                 // implied subgradient, (w_ij - s_ij)/rho
  double max_offdiag_violation = 0.0; // box condition at zero entries of Theta
  double max_sign_violation = 0.0;    // sign condition at nonzeros and the diagonal
  bool passed = false;
};

using Edge = std::pair<std::size_t, std::size_t>;

// Fits the penalized covariance estimate for the given mode.
// Preconditions: diagonal of s strictly positive; in Exact mode s + rho*I
// must pass Cholesky (checked up front, NotPositiveDefinite otherwise).
// On sweep exhaustion the best iterate is returned with converged = false.
// `warm`, when non-null, seeds W (off-diagonal) and B; Exact mode only.
GlassoSolution glasso_fit(const SymMatrix& s, const GlassoConfig& cfg,
                          const GlassoSolution* warm = nullptr);

// Neighborhood-selection approximation (modes MBor / MBand). Solves the p
// column subproblems against the frozen empirical block, applies the
// support rule, then runs the usual write-back and recovery once.
GlassoSolution mb_fit(const SymMatrix& s, const GlassoConfig& cfg);

// Recovers the precision matrix column-by-column from (W, B):
//   theta_jj = 1 / (w_jj - 2 sum_{k!=j} b_kj w_kj)
//   theta_kj = -2 theta_jj b_kj
// then symmetrizes by averaging. Throws NonPositivePivot when a denominator
// is not strictly positive.
SymMatrix theta_recover(const SymMatrix& w, const Matrix& b);

// Checks the stationarity system entrywise at tolerance eps:
// diagonal |w_ii - s_ii - rho| <= eps; nonzero theta_ij needs
// |w_ij - s_ij - rho*sign(theta_ij)| <= eps; zero theta_ij needs
// |w_ij - s_ij| <= rho + eps.
KKTReport kkt_check(const SymMatrix& s, const GlassoSolution& sol, double eps);

// Unordered pairs (i, j), i < j, with max(|theta_ij|, |theta_ji|) > zero_tol.
std::vector<Edge> edge_set(const SymMatrix& theta, double zero_tol);

// Default support threshold: 1e-8 times the largest diagonal entry.
double default_zero_tol(const SymMatrix& theta);

// Largest / mean absolute off-diagonal entry (0 when p == 1).
double max_abs_offdiag(const SymMatrix& m);
double mean_abs_offdiag(const SymMatrix& m);

}  // namespace glasso
