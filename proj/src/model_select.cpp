#include "glasso/model_select.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "glasso/errors.hpp"
#include "glasso/rng.hpp"

namespace glasso {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double trace_product(const SymMatrix& a, const SymMatrix& b) {
  const std::size_t p = a.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double* ra = a.row(i);
    const double* rb = b.row(i);
    for (std::size_t j = 0; j < p; ++j) acc += ra[j] * rb[j];
  }
  return acc;
}

}  // namespace

Dataset Dataset::from_rows(Matrix rows, std::vector<std::string> names) {
  const std::size_t n = rows.rows();
  const std::size_t p = rows.cols();
  if (n < 2) throw std::invalid_argument("Dataset: need at least 2 observations");
  if (p < 1) throw std::invalid_argument("Dataset: need at least 1 variable");
  if (!names.empty() && names.size() != p)
    throw std::invalid_argument("Dataset: name count disagrees with columns");

  Dataset data;
  data.column_means.assign(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = rows.row(i);
    for (std::size_t j = 0; j < p; ++j) data.column_means[j] += r[j];
  }
  for (double& m : data.column_means) m /= static_cast<double>(n);

  if (names.empty())
    for (std::size_t j = 0; j < p; ++j) names.push_back("col" + std::to_string(j));
  data.rows = std::move(rows);
  data.names = std::move(names);
  return data;
}

SymMatrix empirical_covariance(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  if (n < 2) throw std::invalid_argument("empirical_covariance: need n >= 2");

  for (std::size_t j = 0; j < p; ++j) {
    double lo = data.rows(0, j), hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, data.rows(i, j));
      hi = std::max(hi, data.rows(i, j));
    }
    if (!(hi > lo))
      throw DegenerateData("empirical_covariance: column " + std::to_string(j) + " is constant", j);
  }

  Matrix acc(p, p, 0.0);
  std::vector<double> xt(p);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = data.rows.row(i);
    for (std::size_t j = 0; j < p; ++j) xt[j] = r[j] - data.column_means[j];
    for (std::size_t j = 0; j < p; ++j) {
      const double xj = xt[j];
      double* arow = acc.row(j);
      for (std::size_t k = j; k < p; ++k) arow[k] += xj * xt[k];
    }
  }

  SymMatrix s(p);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j; k < p; ++k) s.set(j, k, acc(j, k) * inv_n);

  for (std::size_t j = 0; j < p; ++j)
    if (!(s(j, j) > 0.0))
      throw DegenerateData("empirical_covariance: column " + std::to_string(j) + " has no variance", j);
  return s;
}

SymMatrix covariance_about(const Matrix& rows, std::span<const double> means) {
  const std::size_t n = rows.rows();
  const std::size_t p = rows.cols();
  if (n < 1) throw std::invalid_argument("covariance_about: need n >= 1");
  if (means.size() != p) throw std::invalid_argument("covariance_about: mean dimension mismatch");

  Matrix acc(p, p, 0.0);
  std::vector<double> xt(p);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = rows.row(i);
    for (std::size_t j = 0; j < p; ++j) xt[j] = r[j] - means[j];
    for (std::size_t j = 0; j < p; ++j) {
      const double xj = xt[j];
      double* arow = acc.row(j);
      for (std::size_t k = j; k < p; ++k) arow[k] += xj * xt[k];
    }
  }
  SymMatrix s(p);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j; k < p; ++k) s.set(j, k, acc(j, k) * inv_n);
  return s;
}

double penalized_loglik(const SymMatrix& theta, const SymMatrix& s, double rho) {
  if (theta.dim() != s.dim()) throw std::invalid_argument("penalized_loglik: dimension mismatch");
  const double logdet = chol_logdet(theta);
  double l1 = 0.0;
  for (double v : theta.values()) l1 += std::abs(v);
  return logdet - trace_product(s, theta) - rho * l1;
}

double validation_loglik(const SymMatrix& theta, const SymMatrix& s_valid) {
  if (theta.dim() != s_valid.dim()) throw std::invalid_argument("validation_loglik: dimension mismatch");
  return chol_logdet(theta) - trace_product(s_valid, theta);
}

namespace {

struct FoldSplit {
  Matrix train;
  Matrix valid;
};

FoldSplit split_fold(const Matrix& rows, const std::vector<std::size_t>& order,
                     std::size_t begin, std::size_t count) {
  const std::size_t n = rows.rows();
  const std::size_t p = rows.cols();
  FoldSplit out;
  out.train = Matrix(n - count, p);
  out.valid = Matrix(count, p);
  std::vector<bool> in_valid(n, false);
  for (std::size_t k = 0; k < count; ++k) in_valid[order[begin + k]] = true;
  std::size_t ti = 0, vi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = in_valid[i] ? out.valid.row(vi++) : out.train.row(ti++);
    const double* src = rows.row(i);
    std::copy(src, src + p, dst);
  }
  return out;
}

double regression_score(const GlassoSolution& sol, const Matrix& valid,
                        std::span<const double> train_means) {
  const std::size_t p = valid.cols();
  const std::size_t nv = valid.rows();
  std::vector<double> xt(p);
  double acc = 0.0;
  for (std::size_t i = 0; i < nv; ++i) {
    const double* r = valid.row(i);
    for (std::size_t j = 0; j < p; ++j) xt[j] = r[j] - train_means[j];
    const std::vector<double> v = sym_matvec(sol.theta, xt);
    for (std::size_t j = 0; j < p; ++j) {
      const double e = v[j] / sol.theta(j, j);
      acc += e * e;
    }
  }
  return acc / static_cast<double>(nv * p);
}

}  // namespace

CVResult cv_run(const Dataset& data, const std::vector<double>& rho_grid, int folds,
                CVScheme scheme, std::uint64_t seed, const FitOptions& opt) {
  const std::size_t n = data.n();
  if (folds < 2) throw std::invalid_argument("cv_run: folds must be >= 2");
  if (n < static_cast<std::size_t>(folds)) throw std::invalid_argument("cv_run: folds exceeds n");
  if (rho_grid.empty()) throw std::invalid_argument("cv_run: empty rho grid");
  for (double r : rho_grid)
    if (r < 0.0) throw std::invalid_argument("cv_run: negative rho");

  CVResult res;
  res.rho_grid = rho_grid;
  res.scheme = scheme;
  res.folds = folds;
  res.scores = Matrix(folds, rho_grid.size(), kNaN);

  // Deterministic fold assignment: seeded shuffle dealt into near-equal
  // contiguous chunks.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t base = n / static_cast<std::size_t>(folds);
  const std::size_t rem = n % static_cast<std::size_t>(folds);

  // Grid walked from largest to smallest rho with warm starts; results land
  // in the caller's original order.
  std::vector<std::size_t> by_rho(rho_grid.size());
  std::iota(by_rho.begin(), by_rho.end(), std::size_t{0});
  std::stable_sort(by_rho.begin(), by_rho.end(),
                   [&](std::size_t a, std::size_t b) { return rho_grid[a] > rho_grid[b]; });

  std::vector<std::vector<CVFailure>> fold_failures(folds);

  auto run_fold = [&](int f) {
    std::size_t begin = 0;
    for (int g = 0; g < f; ++g) begin += base + (static_cast<std::size_t>(g) < rem ? 1 : 0);
    const std::size_t count = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);

    FoldSplit fold = split_fold(data.rows, order, begin, count);
    Dataset train;
    SymMatrix s_train{1};
    try {
      train = Dataset::from_rows(std::move(fold.train));
      s_train = empirical_covariance(train);
    } catch (const std::exception& e) {
      fold_failures[f].push_back({f, std::nullopt, e.what()});
      return;
    }

    GlassoSolution warm;
    bool have_warm = false;
    for (std::size_t gi : by_rho) {
      try {
        GlassoConfig cfg;
        cfg.rho = rho_grid[gi];
        cfg.outer_tol = opt.tol;
        cfg.max_outer_sweeps = opt.max_iter;
        GlassoSolution sol = glasso_fit(s_train, cfg, have_warm ? &warm : nullptr);
        double score;
        if (scheme == CVScheme::Regression) {
          score = regression_score(sol, fold.valid, train.column_means);
        } else {
          const SymMatrix s_valid = covariance_about(fold.valid, train.column_means);
          score = validation_loglik(sol.theta, s_valid);
        }
        res.scores(f, gi) = score;
        warm = std::move(sol);
        have_warm = true;
      } catch (const std::exception& e) {
        fold_failures[f].push_back({f, gi, e.what()});
      }
    }
  };

  const int workers = std::clamp(opt.threads, 1, folds);
  if (workers == 1) {
    for (int f = 0; f < folds; ++f) run_fold(f);
  } else {
    std::atomic<int> next{0};
    auto drain = [&]() {
      for (;;) {
        const int f = next.fetch_add(1);
        if (f >= folds) return;
        run_fold(f);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }

  for (auto& fl : fold_failures)
    for (auto& f : fl) res.failures.push_back(std::move(f));

  res.mean_scores.assign(rho_grid.size(), kNaN);
  res.std_errors.assign(rho_grid.size(), kNaN);
  for (std::size_t gi = 0; gi < rho_grid.size(); ++gi) {
    double sum = 0.0;
    int k = 0;
    for (int f = 0; f < folds; ++f) {
      const double v = res.scores(f, gi);
      if (!std::isnan(v)) {
        sum += v;
        ++k;
      }
    }
    if (k == 0) continue;
    const double mean = sum / k;
    res.mean_scores[gi] = mean;
    if (k >= 2) {
      double ss = 0.0;
      for (int f = 0; f < folds; ++f) {
        const double v = res.scores(f, gi);
        if (!std::isnan(v)) ss += (v - mean) * (v - mean);
      }
      res.std_errors[gi] = std::sqrt(ss / (k - 1)) / std::sqrt(static_cast<double>(k));
    }
  }
  return res;
}

double calibrate_rho(const SymMatrix& s, std::size_t target_nonzeros,
                     std::pair<double, double> bounds, int max_bisections,
                     const FitOptions& opt) {
  const std::size_t p = s.dim();
  if (target_nonzeros > p * (p - 1))
    throw std::invalid_argument("calibrate_rho: target exceeds p(p-1)");
  double lo = bounds.first, hi = bounds.second;
  if (!(lo >= 0.0) || !(lo < hi)) throw std::invalid_argument("calibrate_rho: need 0 <= lo < hi");
  if (max_bisections < 0) throw std::invalid_argument("calibrate_rho: max_bisections must be >= 0");

  auto count_at = [&](double rho) {
    GlassoConfig cfg;
    cfg.rho = rho;
    cfg.outer_tol = opt.tol;
    cfg.max_outer_sweeps = opt.max_iter;
    const GlassoSolution sol = glasso_fit(s, cfg);
    return 2 * edge_set(sol.theta, default_zero_tol(sol.theta)).size();
  };

  const std::size_t c_lo = count_at(lo);
  if (c_lo < target_nonzeros)
    throw BoundsDoNotBracket("calibrate_rho: count at lo (" + std::to_string(c_lo) +
                             ") is below target " + std::to_string(target_nonzeros));
  const std::size_t c_hi = count_at(hi);
  if (c_hi > target_nonzeros)
    throw BoundsDoNotBracket("calibrate_rho: count at hi (" + std::to_string(c_hi) +
                             ") is above target " + std::to_string(target_nonzeros));

  double best_rho = hi;
  std::size_t best_diff = c_hi > target_nonzeros ? c_hi - target_nonzeros : target_nonzeros - c_hi;
  auto consider = [&](double rho, std::size_t c) {
    const std::size_t diff = c > target_nonzeros ? c - target_nonzeros : target_nonzeros - c;
    // ties prefer the sparser model
    if (diff < best_diff || (diff == best_diff && rho > best_rho)) {
      best_diff = diff;
      best_rho = rho;
    }
  };
  consider(lo, c_lo);

  for (int it = 0; it < max_bisections && best_diff > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::size_t c = count_at(mid);
    consider(mid, c);
    if (c > target_nonzeros)
      lo = mid;
    else
      hi = mid;
  }
  return best_rho;
}

PathResult path_run(const SymMatrix& s, const std::vector<double>& rho_grid,
                    const FitOptions& opt) {
  if (rho_grid.empty()) throw std::invalid_argument("path_run: empty grid");
  for (double r : rho_grid)
    if (r < 0.0) throw std::invalid_argument("path_run: negative rho");

  const std::size_t p = s.dim();
  PathResult out;
  out.rho_grid = rho_grid;
  out.points.resize(rho_grid.size());

  std::vector<std::size_t> by_rho(rho_grid.size());
  std::iota(by_rho.begin(), by_rho.end(), std::size_t{0});
  std::stable_sort(by_rho.begin(), by_rho.end(),
                   [&](std::size_t a, std::size_t b) { return rho_grid[a] > rho_grid[b]; });

  GlassoSolution warm;
  bool have_warm = false;
  for (std::size_t idx : by_rho) {
    PathPoint pt;
    pt.rho = rho_grid[idx];
    try {
      GlassoConfig cfg;
      cfg.rho = pt.rho;
      cfg.outer_tol = opt.tol;
      cfg.max_outer_sweeps = opt.max_iter;
      GlassoSolution sol = glasso_fit(s, cfg, have_warm ? &warm : nullptr);

      pt.ok = true;
      pt.converged = sol.converged;
      pt.outer_sweeps = sol.outer_sweeps;
      pt.kkt_passed = kkt_check(s, sol, 10.0 * opt.tol).passed;
      pt.edges = edge_set(sol.theta, default_zero_tol(sol.theta));
      pt.pair_coefs.reserve(p * (p - 1) / 2);
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
          const double gij = -sol.theta(i, j) / sol.theta(j, j);  // i predicting j
          const double gji = -sol.theta(j, i) / sol.theta(i, i);  // j predicting i
          pt.coef_l1 += std::abs(gij) + std::abs(gji);
          pt.pair_coefs.push_back(0.5 * (gij + gji));
        }
      }
      warm = std::move(sol);
      have_warm = true;
    } catch (const std::exception& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    out.points[idx] = std::move(pt);
  }
  return out;
}

std::vector<double> default_rho_grid(const SymMatrix& s, std::size_t count) {
  if (count < 1) throw std::invalid_argument("default_rho_grid: count must be >= 1");
  const double top = max_abs_offdiag(s);
  std::vector<double> grid(count, 0.0);
  if (top <= 0.0) return grid;
  if (count == 1) {
    grid[0] = top;
    return grid;
  }
  const double step = std::pow(0.01, 1.0 / static_cast<double>(count - 1));
  double r = top;
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = r;
    r *= step;
  }
  return grid;
}

}  // namespace glasso
