#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glasso/glasso.hpp"
#include "glasso/model_select.hpp"
#include "glasso/sym_matrix.hpp"

namespace glasso {

// SparseAR1: tridiagonal truth precision, unit diagonal, 0.5 bands.
// Dense: diagonal 2, off-diagonal 1 (eigenvalues 1 and p+1).
enum class ScenarioKind { SparseAR1, Dense };

struct Scenario {
  ScenarioKind kind = ScenarioKind::SparseAR1;
  std::size_t p = 2;
  std::size_t n = 2;
  std::uint64_t seed = 0;
};

struct BenchRecord {
  Scenario scenario;
  Mode method = Mode::Exact;
  double rho = 0.0;
  double wall_seconds = 0.0;  // median over repetitions, monotonic clock
  double exact_time_ratio = 0.0;  // exact wall / this wall; 0 when exact absent
  int outer_sweeps = 0;
  std::size_t nonzeros_found = 0;  // ordered off-diagonal count in Theta
  std::size_t nonzeros_true = 0;
  bool ok = true;
  std::string error;
};

// Exact truth precision matrix for the scenario family.
SymMatrix true_precision(const Scenario& scn);

// n i.i.d. draws from N(0, precision^-1): factor the precision and solve
// L^T x = z against standard normal z. Deterministic per seed.
Dataset sample_gaussian(const SymMatrix& precision, std::size_t n, std::uint64_t seed);

struct BenchOptions {
  int repetitions = 1;
  double tol = 1e-4;
  int max_iter = 100;
  int max_bisections = 6;
};

// For each scenario: samples data, calibrates rho toward the true nonzero
// count (sparse) or half the off-diagonal entries (dense), then times each
// method. Data generation and calibration stay outside the timed region;
// cells run one at a time so wall-clock stays meaningful.
std::vector<BenchRecord> run_benchmark(std::span<const Scenario> scenarios,
                                       std::span<const Mode> methods,
                                       const BenchOptions& opt = {});

}  // namespace glasso
