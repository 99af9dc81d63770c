#include "glasso/synthgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "glasso/errors.hpp"
#include "glasso/rng.hpp"

namespace glasso {

SymMatrix true_precision(const Scenario& scn) {
  if (scn.p < 2) throw std::invalid_argument("true_precision: p must be >= 2");
  SymMatrix theta(scn.p);
  switch (scn.kind) {
    case ScenarioKind::SparseAR1:
      for (std::size_t i = 0; i < scn.p; ++i) {
        theta.set(i, i, 1.0);
        if (i + 1 < scn.p) theta.set(i, i + 1, 0.5);
      }
      break;
    case ScenarioKind::Dense:
      for (std::size_t i = 0; i < scn.p; ++i) {
        theta.set(i, i, 2.0);
        for (std::size_t j = i + 1; j < scn.p; ++j) theta.set(i, j, 1.0);
      }
      break;
  }
  return theta;
}

Dataset sample_gaussian(const SymMatrix& precision, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_gaussian: need n >= 2");
  const std::size_t p = precision.dim();
  const Cholesky factor(precision);  // throws NotPositiveDefinite

  Rng rng(seed);
  Matrix rows(n, p);
  std::vector<double> z(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) z[j] = rng.normal();
    const std::vector<double> x = factor.solve_transposed(z);
    std::copy(x.begin(), x.end(), rows.row(i));
  }
  return Dataset::from_rows(std::move(rows));
}

namespace {

std::size_t ordered_nonzeros(const SymMatrix& theta, double ztol) {
  return 2 * edge_set(theta, ztol).size();
}

std::size_t true_nonzeros(const Scenario& scn) {
  switch (scn.kind) {
    case ScenarioKind::SparseAR1:
      return 2 * (scn.p - 1);
    case ScenarioKind::Dense:
      return scn.p * (scn.p - 1);
  }
  return 0;
}

}  // namespace

std::vector<BenchRecord> run_benchmark(std::span<const Scenario> scenarios,
                                       std::span<const Mode> methods,
                                       const BenchOptions& opt) {
  if (scenarios.empty() || methods.empty())
    throw std::invalid_argument("run_benchmark: scenario and method lists must be non-empty");
  if (opt.repetitions < 1) throw std::invalid_argument("run_benchmark: repetitions must be >= 1");

  using clock = std::chrono::steady_clock;
  std::vector<BenchRecord> records;
  records.reserve(scenarios.size() * methods.size());

  FitOptions fit_opt;
  fit_opt.tol = opt.tol;
  fit_opt.max_iter = opt.max_iter;

  for (const Scenario& scn : scenarios) {
    const SymMatrix theta_true = true_precision(scn);
    const Dataset data = sample_gaussian(theta_true, scn.n, scn.seed);
    const SymMatrix s = empirical_covariance(data);

    const std::size_t nz_true = true_nonzeros(scn);
    const std::size_t target =
        scn.kind == ScenarioKind::SparseAR1 ? nz_true : scn.p * (scn.p - 1) / 2;

    double rho = 0.0;
    std::string calib_error;
    try {
      const double top = max_abs_offdiag(s);
      rho = calibrate_rho(s, target, {top * 1e-3, top}, opt.max_bisections, fit_opt);
    } catch (const std::exception& e) {
      calib_error = e.what();
    }

    const std::size_t first_record = records.size();
    for (Mode method : methods) {
      BenchRecord rec;
      rec.scenario = scn;
      rec.method = method;
      rec.rho = rho;
      rec.nonzeros_true = nz_true;
      if (!calib_error.empty()) {
        rec.ok = false;
        rec.error = "calibration failed: " + calib_error;
        records.push_back(std::move(rec));
        continue;
      }

      GlassoConfig cfg;
      cfg.rho = rho;
      cfg.outer_tol = opt.tol;
      cfg.max_outer_sweeps = opt.max_iter;
      cfg.mode = method;

      std::vector<double> times;
      times.reserve(opt.repetitions);
      try {
        for (int rep = 0; rep < opt.repetitions; ++rep) {
          const auto t0 = clock::now();
          const GlassoSolution sol = glasso_fit(s, cfg);
          const auto t1 = clock::now();
          times.push_back(std::chrono::duration<double>(t1 - t0).count());
          rec.outer_sweeps = sol.outer_sweeps;
          rec.nonzeros_found = ordered_nonzeros(sol.theta, default_zero_tol(sol.theta));
        }
        std::sort(times.begin(), times.end());
        rec.wall_seconds = times[times.size() / 2];
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
      records.push_back(std::move(rec));
    }

    const BenchRecord* exact = nullptr;
    for (std::size_t k = first_record; k < records.size(); ++k)
      if (records[k].method == Mode::Exact && records[k].ok) exact = &records[k];
    if (exact != nullptr)
      for (std::size_t k = first_record; k < records.size(); ++k)
        if (records[k].ok && records[k].wall_seconds > 0.0)
          records[k].exact_time_ratio = exact->wall_seconds / records[k].wall_seconds;
  }
  return records;
}

}  // namespace glasso
