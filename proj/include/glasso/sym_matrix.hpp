#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace glasso {

// Soft-threshold kernel: sign(x) * max(|x| - t, 0). Total for t >= 0.
double soft_threshold(double x, double t);

class SymMatrix;
struct Partition;
Partition extract_partition(const SymMatrix& m, std::size_t j);

// Dense symmetric matrix. Both triangles are stored and every write goes
// through set(), which updates (i,j) and (j,i) together, so symmetry is
// bit-exact by construction.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t p);
  static SymMatrix identity(std::size_t p);
  // Builds from full rows; requires bit-exact symmetry (test/tooling aid).
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t dim() const { return p_; }

  double operator()(std::size_t i, std::size_t j) const { return v_[i * p_ + j]; }

  void set(std::size_t i, std::size_t j, double x) {
    v_[i * p_ + j] = x;
    v_[j * p_ + i] = x;
  }

  // Contiguous row i; equals column i by symmetry.
  const double* row(std::size_t i) const { return v_.data() + i * p_; }
  std::span<const double> values() const { return v_; }

  bool operator==(const SymMatrix&) const = default;

 private:
  SymMatrix(std::size_t p, std::vector<double> v) : p_(p), v_(std::move(v)) {}
  friend Partition extract_partition(const SymMatrix& m, std::size_t j);

  std::size_t p_;
  std::vector<double> v_;
};

// Minimal dense row-major matrix for non-symmetric payloads
// (observation tables, coefficient matrices).
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  const double* row(std::size_t i) const { return v_.data() + i * cols_; }
  double* row(std::size_t i) { return v_.data() + i * cols_; }
  std::span<const double> values() const { return v_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> v_;
};

// Blocks of a symmetric matrix with row/column `target` logically moved to
// the last position: block11 keeps the remaining rows/columns in their
// original relative order, vec12 is column `target` with entry `target`
// removed, scalar22 is the diagonal entry.
struct Partition {
  std::size_t target = 0;
  SymMatrix block11{1};
  std::vector<double> vec12;
  double scalar22 = 0.0;
};

// Copies the (p-1)x(p-1) block into contiguous storage; requires p >= 2.
// No physical permutation of the source is performed.
Partition extract_partition(const SymMatrix& m, std::size_t j);

// Writes vec12/scalar22 back as row and column j of m. block11 is not
// consulted; only row/column j changes. Symmetry is preserved.
void insert_partition(const Partition& part, std::size_t j, SymMatrix& m);

// Column j of m with entry j removed (same order convention as Partition).
std::vector<double> column_without(const SymMatrix& m, std::size_t j);

std::vector<double> sym_matvec(const SymMatrix& m, std::span<const double> x);

// Lower-triangular Cholesky factor of an SPD matrix.
// Throws NotPositiveDefinite when a pivot is not strictly positive.
class Cholesky {
 public:
  explicit Cholesky(const SymMatrix& m);

  std::size_t dim() const { return p_; }
  double logdet() const;

  // Solves L L^T x = b.
  std::vector<double> solve(std::span<const double> b) const;
  // Solves L^T x = z (back-substitution only).
  std::vector<double> solve_transposed(std::span<const double> z) const;

 private:
  std::size_t p_;
  std::vector<double> l_;  // row-major, upper triangle left zero
};

// log det M via Cholesky; throws NotPositiveDefinite.
double chol_logdet(const SymMatrix& m);

}  // namespace glasso
