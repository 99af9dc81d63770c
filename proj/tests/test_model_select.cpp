#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "glasso/errors.hpp"
#include "glasso/model_select.hpp"
#include "glasso/rng.hpp"
#include "glasso/synthgen.hpp"
#include "oracles.hpp"

using namespace glasso;

namespace {

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t p, double scale = 1.0) {
  Matrix rows(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) rows(i, j) = scale * rng.normal() + 0.3 * j;
  return Dataset::from_rows(std::move(rows));
}

// One-pass covariance: E[xy] - E[x]E[y], deliberately a different formula
// from the library's centered two-pass accumulation.
SymMatrix covariance_onepass(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  SymMatrix s(p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j; k < p; ++k) {
      double sxy = 0.0, sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sxy += data.rows(i, j) * data.rows(i, k);
        sx += data.rows(i, j);
        sy += data.rows(i, k);
      }
      s.set(j, k, sxy / n - (sx / n) * (sy / n));
    }
  return s;
}

}  // namespace

TEST_CASE("empirical covariance: hand example, degenerate column, oracle match") {
  Matrix two(2, 2);
  two(0, 0) = 0.0;
  two(0, 1) = 0.0;
  two(1, 0) = 2.0;
  two(1, 1) = 2.0;
  const SymMatrix s = empirical_covariance(Dataset::from_rows(two));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(s(i, j) == doctest::Approx(1.0).epsilon(1e-15));

  Matrix constant(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    constant(i, 0) = 1.5 + i;
    constant(i, 1) = 4.2;
  }
  CHECK_THROWS_AS(empirical_covariance(Dataset::from_rows(constant)), DegenerateData);

  Rng rng(7);
  const Dataset data = random_dataset(rng, 40, 5);
  const SymMatrix got = empirical_covariance(data);
  const SymMatrix want = covariance_onepass(data);
  CHECK(oracle::max_abs_diff(got, want) < 1e-12);
}

TEST_CASE("penalized log-likelihood closed forms") {
  const SymMatrix i2 = SymMatrix::identity(2);
  const SymMatrix i5 = SymMatrix::identity(5);
  CHECK(penalized_loglik(i5, i5, 0.0) == doctest::Approx(-5.0));
  CHECK(penalized_loglik(i2, i2, 0.1) == doctest::Approx(-2.2));
  CHECK_THROWS_AS(penalized_loglik(SymMatrix::from_rows({{1.0, 2.0}, {2.0, 1.0}}), i2, 0.1),
                  NotPositiveDefinite);
}

TEST_CASE("fitted precision maximizes the penalized objective against random probes") {
  Rng rng(13);
  for (std::size_t p : {3, 5}) {
    const SymMatrix s = oracle::random_spd(rng, p);
    const double rho = 0.1;
    const GlassoSolution sol = glasso_fit(s, {rho, 1e-7, 100, Mode::Exact});
    const double best = penalized_loglik(sol.theta, s, rho);
    for (int trial = 0; trial < 100; ++trial) {
      SymMatrix probe = sol.theta;
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j)
          probe.set(i, j, probe(i, j) + 0.05 * rng.normal());
      try {
        CHECK(penalized_loglik(probe, s, rho) <= best + 1e-9);
      } catch (const NotPositiveDefinite&) {
        // probe left the cone; nothing to compare
      }
    }
  }
}

TEST_CASE("validation log-likelihood closed forms and consistency") {
  const SymMatrix i4 = SymMatrix::identity(4);
  CHECK(validation_loglik(i4, i4) == doctest::Approx(-4.0));

  // with diagonal S the decoupled optimum is theta_ii = 1/s_ii
  SymMatrix sv(3);
  sv.set(0, 0, 0.5);
  sv.set(1, 1, 2.0);
  sv.set(2, 2, 4.0);
  SymMatrix opt(3);
  for (std::size_t i = 0; i < 3; ++i) opt.set(i, i, 1.0 / sv(i, i));
  const double at_opt = validation_loglik(opt, sv);
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    SymMatrix probe = opt;
    for (std::size_t i = 0; i < 3; ++i)
      probe.set(i, i, opt(i, i) * std::exp(0.2 * rng.normal()));
    CHECK(validation_loglik(probe, sv) <= at_opt + 1e-12);
  }

  const SymMatrix any = oracle::random_spd(rng, 4);
  CHECK(validation_loglik(i4, any) == penalized_loglik(i4, any, 0.0));
}

TEST_CASE("cv: regression score approaches the validation variance under heavy penalty") {
  // independent unit-variance columns; a large penalty collapses predictions
  // to the training means, so the score estimates the marginal variance.
  Rng rng(19);
  Matrix rows(400, 4);
  for (std::size_t i = 0; i < 400; ++i)
    for (std::size_t j = 0; j < 4; ++j) rows(i, j) = rng.normal();
  const Dataset data = Dataset::from_rows(std::move(rows));
  const CVResult res = cv_run(data, {10.0}, 5, CVScheme::Regression, 42);
  CHECK(res.failures.empty());
  CHECK(res.mean_scores[0] == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("cv: leave-one-out shape contract") {
  Rng rng(23);
  const Dataset data = random_dataset(rng, 12, 3);
  const std::vector<double> grid = {0.5, 0.1};
  const CVResult res = cv_run(data, grid, 12, CVScheme::Likelihood, 1);
  CHECK(res.scores.rows() == 12);
  CHECK(res.scores.cols() == 2);
  CHECK(res.folds == 12);
  int produced = 0;
  for (int f = 0; f < 12; ++f)
    for (std::size_t g = 0; g < 2; ++g)
      if (!std::isnan(res.scores(f, g))) ++produced;
  CHECK(produced + static_cast<int>(res.failures.size()) * 2 >= 24 - 4);

  // reported means are the arithmetic means of the produced fold scores
  for (std::size_t g = 0; g < 2; ++g) {
    double sum = 0.0;
    int k = 0;
    for (int f = 0; f < 12; ++f)
      if (!std::isnan(res.scores(f, g))) {
        sum += res.scores(f, g);
        ++k;
      }
    if (k > 0) CHECK(res.mean_scores[g] == doctest::Approx(sum / k).epsilon(1e-14));
  }
}

TEST_CASE("cv: identical seeds give identical results, different seeds differ") {
  Rng rng(29);
  const Dataset data = random_dataset(rng, 60, 4);
  const std::vector<double> grid = {0.4, 0.1, 0.02};
  const CVResult a = cv_run(data, grid, 6, CVScheme::Likelihood, 123);
  const CVResult b = cv_run(data, grid, 6, CVScheme::Likelihood, 123);
  CHECK(a.scores == b.scores);  // bit-exact
  CHECK(a.mean_scores == b.mean_scores);
  const CVResult c = cv_run(data, grid, 6, CVScheme::Likelihood, 124);
  CHECK(a.scores != c.scores);
}

TEST_CASE("cv: worker threads do not change the result") {
  Rng rng(31);
  const Dataset data = random_dataset(rng, 80, 5);
  const std::vector<double> grid = {0.3, 0.05};
  FitOptions serial;
  serial.threads = 1;
  FitOptions parallel;
  parallel.threads = 4;
  const CVResult a = cv_run(data, grid, 8, CVScheme::Regression, 7, serial);
  const CVResult b = cv_run(data, grid, 8, CVScheme::Regression, 7, parallel);
  CHECK(a.scores == b.scores);
}

TEST_CASE("cv: regression score is invariant to variable relabeling") {
  Rng rng(37);
  const Dataset data = random_dataset(rng, 50, 4);
  Matrix permuted(50, 4);
  const std::size_t perm[4] = {2, 0, 3, 1};
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 4; ++j) permuted(i, perm[j]) = data.rows(i, j);
  const Dataset data2 = Dataset::from_rows(std::move(permuted));
  const std::vector<double> grid = {0.2, 0.05};
  FitOptions tight;
  tight.tol = 1e-7;  // relabeling symmetry is exact only at the optimum
  const CVResult a = cv_run(data, grid, 5, CVScheme::Regression, 11, tight);
  const CVResult b = cv_run(data2, grid, 5, CVScheme::Regression, 11, tight);
  for (std::size_t g = 0; g < grid.size(); ++g)
    CHECK(a.mean_scores[g] == doctest::Approx(b.mean_scores[g]).epsilon(1e-7));
}

TEST_CASE("cv: likelihood score punishes wrongly scaled precision matrices") {
  Rng rng(41);
  const Dataset data = random_dataset(rng, 100, 4);
  const SymMatrix s = empirical_covariance(data);
  const GlassoSolution sol = glasso_fit(s, {0.05, 1e-5, 100, Mode::Exact});
  const double fitted = validation_loglik(sol.theta, s);
  double worse_count = 0;
  for (int trial = 0; trial < 20; ++trial) {
    SymMatrix wrong = sol.theta;
    const double c = std::exp(1.5 + std::abs(rng.normal()));
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i; j < 4; ++j) wrong.set(i, j, wrong(i, j) * c);
    if (validation_loglik(wrong, s) < fitted) ++worse_count;
  }
  CHECK(worse_count >= 18);
}

TEST_CASE("calibrate_rho: empty-support and full-support targets") {
  Rng rng(43);
  const SymMatrix s = oracle::random_spd(rng, 6);
  const double top = max_abs_offdiag(s);

  const double rho_sparse = calibrate_rho(s, 0, {top * 1e-3, top * 1.01}, 12);
  const GlassoSolution sparse = glasso_fit(s, {rho_sparse, 1e-4, 100, Mode::Exact});
  CHECK(edge_set(sparse.theta, default_zero_tol(sparse.theta)).empty());

  // dense truth with n >> p keeps S positive definite, so lo = 0 is legal
  const Scenario dense{ScenarioKind::Dense, 5, 400, 3};
  const SymMatrix s_dense = empirical_covariance(sample_gaussian(true_precision(dense), 400, 3));
  const double rho_dense = calibrate_rho(s_dense, 5 * 4, {0.0, max_abs_offdiag(s_dense)}, 10);
  const GlassoSolution full = glasso_fit(s_dense, {rho_dense, 1e-4, 100, Mode::Exact});
  CHECK(2 * edge_set(full.theta, default_zero_tol(full.theta)).size() == 20);
  CHECK(rho_dense < 0.1 * max_abs_offdiag(s_dense));
}

TEST_CASE("calibrate_rho: bracket violations throw") {
  const SymMatrix ident = SymMatrix::identity(4);
  // identity has zero off-diagonals: count(lo) == 0 < target
  CHECK_THROWS_AS(calibrate_rho(ident, 6, {1e-4, 1.0}, 8), BoundsDoNotBracket);

  Rng rng(47);
  const SymMatrix s = oracle::random_spd(rng, 5);
  // hi too small to empty the support while the target asks for zero
  CHECK_THROWS_AS(calibrate_rho(s, 0, {1e-6, 1e-5}, 8), BoundsDoNotBracket);
}

TEST_CASE("calibrate_rho: nonzero count along a decreasing grid, logged not asserted") {
  Rng rng(53);
  const Scenario scn{ScenarioKind::SparseAR1, 8, 500, 9};
  const SymMatrix s = empirical_covariance(sample_gaussian(true_precision(scn), scn.n, scn.seed));
  std::vector<std::size_t> counts;
  for (double rho : default_rho_grid(s, 8)) {
    const GlassoSolution sol = glasso_fit(s, {rho, 1e-4, 100, Mode::Exact});
    counts.push_back(2 * edge_set(sol.theta, default_zero_tol(sol.theta)).size());
  }
  std::string log = "nonzero counts along decreasing rho:";
  bool monotone = true;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    log += " " + std::to_string(counts[k]);
    if (k > 0 && counts[k] < counts[k - 1]) monotone = false;
  }
  MESSAGE(log, monotone ? " (monotone)" : " (non-monotone)");
  CHECK(counts.front() <= counts.back());  // ends are ordered even if the middle wiggles
}

TEST_CASE("path_run: single-point grid at rho_max gives the diagonal solution") {
  Rng rng(59);
  const SymMatrix s = oracle::random_spd(rng, 5);
  const PathResult res = path_run(s, {max_abs_offdiag(s)});
  REQUIRE(res.points.size() == 1);
  CHECK(res.points[0].ok);
  CHECK(res.points[0].edges.empty());
  CHECK(res.points[0].kkt_passed);
}

TEST_CASE("path_run: warm-started points match cold fits") {
  Rng rng(61);
  const SymMatrix s = oracle::random_spd(rng, 7);
  const std::vector<double> grid = default_rho_grid(s, 6);
  FitOptions tight;
  tight.tol = 1e-6;
  const PathResult path = path_run(s, grid, tight);

  const GlassoSolution* warm = nullptr;
  GlassoSolution chain;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    REQUIRE(path.points[g].ok);
    CHECK(path.points[g].kkt_passed);
    const GlassoConfig cfg{grid[g], 1e-6, 100, Mode::Exact};
    const GlassoSolution cold = glasso_fit(s, cfg);
    chain = glasso_fit(s, cfg, warm);  // same warm chain path_run walks
    warm = &chain;
    CHECK(oracle::max_abs_diff(chain.w, cold.w) < 1e-6);

    const auto cold_edges = edge_set(cold.theta, default_zero_tol(cold.theta));
    CHECK(path.points[g].edges == cold_edges);
    std::size_t k = 0;
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = i + 1; j < 7; ++j) {
        const double gij = -cold.theta(i, j) / cold.theta(j, j);
        const double gji = -cold.theta(j, i) / cold.theta(i, i);
        CHECK(path.points[g].pair_coefs[k++] ==
              doctest::Approx(0.5 * (gij + gji)).epsilon(1e-6));
      }
  }
}

TEST_CASE("path_run: identity input repeats the empty solution across the grid") {
  const SymMatrix ident = SymMatrix::identity(4);
  const PathResult res = path_run(ident, default_rho_grid(ident, 5));
  for (const PathPoint& pt : res.points) {
    CHECK(pt.ok);
    CHECK(pt.edges.empty());
    CHECK(pt.coef_l1 == 0.0);
  }
}

TEST_CASE("default grid spans two decades down from rho_max") {
  Rng rng(67);
  const SymMatrix s = oracle::random_spd(rng, 5);
  const std::vector<double> grid = default_rho_grid(s);
  REQUIRE(grid.size() == 12);
  CHECK(grid.front() == doctest::Approx(max_abs_offdiag(s)));
  CHECK(grid.back() == doctest::Approx(max_abs_offdiag(s) / 100.0).epsilon(1e-9));
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] < grid[k - 1]);
}
