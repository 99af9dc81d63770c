#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "glasso/glasso.hpp"
#include "glasso/sym_matrix.hpp"

namespace glasso {

// Observation table with the column means cached at construction.
struct Dataset {
  Matrix rows;                      // n x p
  std::vector<double> column_means;
  std::vector<std::string> names;   // col0..col(p-1) when not supplied

  std::size_t n() const { return rows.rows(); }
  std::size_t p() const { return rows.cols(); }

  // Computes means and default names; requires n >= 2, p >= 1.
  static Dataset from_rows(Matrix rows, std::vector<std::string> names = {});
};

// Maximum-likelihood empirical covariance: S = (1/n) sum (x - xbar)(x - xbar)'.
// Throws DegenerateData when a column is constant.
SymMatrix empirical_covariance(const Dataset& data);

// (1/n)-normalized second-moment matrix of rows centered at the given means
// (validation scoring; no degeneracy requirement).
SymMatrix covariance_about(const Matrix& rows, std::span<const double> means);

// log det Theta - tr(S Theta) - rho * ||Theta||_1, with the L1 norm summing
// every entry including the diagonal. Throws NotPositiveDefinite.
double penalized_loglik(const SymMatrix& theta, const SymMatrix& s, double rho);

// log det Theta - tr(S_valid Theta); the fit score with no penalty term.
double validation_loglik(const SymMatrix& theta, const SymMatrix& s_valid);

enum class CVScheme { Regression, Likelihood };

// A fold (or one grid point of a fold) that failed to fit. rho_index is
// empty when the whole fold was unusable.
struct CVFailure {
  int fold = 0;
  std::optional<std::size_t> rho_index;
  std::string message;
};

struct CVResult {
  std::vector<double> rho_grid;
  Matrix scores;                   // folds x |grid|; NaN where a cell failed
  std::vector<double> mean_scores; // over the folds that produced a score
  std::vector<double> std_errors;  // sample std across folds / sqrt(#folds)
  CVScheme scheme = CVScheme::Likelihood;
  int folds = 0;
  std::vector<CVFailure> failures;
};

struct FitOptions {
  double tol = 1e-4;
  int max_iter = 100;
  int threads = 1;
};

// K-fold cross-validation over the penalty grid. Fold assignment is a
// seeded shuffle dealt into near-equal contiguous chunks, so equal seeds
// reproduce byte-identical results. Regression scoring predicts each
// variable from the others via gamma_kj = -theta_kj / theta_jj around the
// training means and averages squared errors over rows and variables;
// Likelihood scoring evaluates validation_loglik with the validation
// covariance centered at the training means. Failed cells are recorded in
// `failures`, never silently dropped.
CVResult cv_run(const Dataset& data, const std::vector<double>& rho_grid, int folds,
                CVScheme scheme, std::uint64_t seed, const FitOptions& opt = {});

// Bisection of rho against the off-diagonal nonzero count of the fitted
// precision matrix (ordered pairs). Returns the evaluated rho whose count
// is closest to target. Throws BoundsDoNotBracket when count(lo) < target
// or count(hi) > target.
double calibrate_rho(const SymMatrix& s, std::size_t target_nonzeros,
                     std::pair<double, double> bounds, int max_bisections,
                     const FitOptions& opt = {});

struct PathPoint {
  double rho = 0.0;
  bool ok = false;
  std::string error;
  bool converged = false;
  bool kkt_passed = false;
  int outer_sweeps = 0;
  std::vector<Edge> edges;
  double coef_l1 = 0.0;             // sum over ordered pairs of |gamma_kj|
  std::vector<double> pair_coefs;   // per unordered pair (i<j, lexicographic)
};

struct PathResult {
  std::vector<double> rho_grid;    // as given by the caller
  std::vector<PathPoint> points;   // aligned with rho_grid
};

// Fits the grid from largest to smallest rho with warm-started W and B,
// verifying each solution against the stationarity conditions. Per-point
// failures are recorded and flagged. The reported pairwise coefficient is
// the average of gamma_ij and gamma_ji where gamma_kj = -theta_kj/theta_jj.
PathResult path_run(const SymMatrix& s, const std::vector<double>& rho_grid,
                    const FitOptions& opt = {});

// 12 log-spaced penalties from max offdiag |s_ij| down two decades.
std::vector<double> default_rho_grid(const SymMatrix& s, std::size_t count = 12);

}  // namespace glasso
