#include "glasso/sym_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "glasso/errors.hpp"

namespace glasso {

double soft_threshold(double x, double t) {
  double shrunk = std::abs(x) - t;
  if (shrunk <= 0.0) return 0.0;
  return x > 0.0 ? shrunk : -shrunk;
}

SymMatrix::SymMatrix(std::size_t p) : p_(p), v_(p * p, 0.0) {
  if (p == 0) throw std::invalid_argument("SymMatrix: dimension must be >= 1");
}

SymMatrix SymMatrix::identity(std::size_t p) {
  SymMatrix m(p);
  for (std::size_t i = 0; i < p; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t p = rows.size();
  SymMatrix m(p);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != p) throw std::invalid_argument("SymMatrix::from_rows: ragged rows");
    std::size_t j = 0;
    for (double x : r) m.v_[i * p + j++] = x;
    ++i;
  }
  for (i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (m.v_[i * p + j] != m.v_[j * p + i])
        throw std::invalid_argument("SymMatrix::from_rows: input is not symmetric");
  return m;
}

Partition extract_partition(const SymMatrix& m, std::size_t j) {
  const std::size_t p = m.dim();
  if (p < 2) throw std::invalid_argument("extract_partition: need dimension >= 2");
  if (j >= p) throw std::out_of_range("extract_partition: column index out of range");

  Partition part;
  part.target = j;
  part.vec12.resize(p - 1);
  part.scalar22 = m(j, j);

  // Row-wise block copy, skipping row/column j. Two memcpy spans per row.
  std::vector<double> blk((p - 1) * (p - 1));
  for (std::size_t r = 0; r < p - 1; ++r) {
    const std::size_t sr = r < j ? r : r + 1;
    const double* src = m.row(sr);
    double* dst = blk.data() + r * (p - 1);
    if (j > 0) std::memcpy(dst, src, j * sizeof(double));
    if (j + 1 < p) std::memcpy(dst + j, src + j + 1, (p - 1 - j) * sizeof(double));
    part.vec12[r] = src[j];
  }
  part.block11 = SymMatrix(p - 1, std::move(blk));
  return part;
}

void insert_partition(const Partition& part, std::size_t j, SymMatrix& m) {
  const std::size_t p = m.dim();
  if (p < 2 || part.vec12.size() != p - 1)
    throw std::invalid_argument("insert_partition: dimension mismatch");
  if (j >= p) throw std::out_of_range("insert_partition: column index out of range");

  for (std::size_t r = 0; r < p - 1; ++r) {
    const std::size_t sr = r < j ? r : r + 1;
    m.set(sr, j, part.vec12[r]);
  }
  m.set(j, j, part.scalar22);
}

std::vector<double> column_without(const SymMatrix& m, std::size_t j) {
  const std::size_t p = m.dim();
  if (p < 2) throw std::invalid_argument("column_without: need dimension >= 2");
  if (j >= p) throw std::out_of_range("column_without: column index out of range");
  std::vector<double> out(p - 1);
  const double* col = m.row(j);  // row j == column j
  for (std::size_t r = 0; r < p - 1; ++r) out[r] = col[r < j ? r : r + 1];
  return out;
}

std::vector<double> sym_matvec(const SymMatrix& m, std::span<const double> x) {
  const std::size_t p = m.dim();
  if (x.size() != p) throw std::invalid_argument("sym_matvec: dimension mismatch");
  std::vector<double> y(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    const double* row = m.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < p; ++k) acc += row[k] * x[k];
    y[i] = acc;
  }
  return y;
}

Cholesky::Cholesky(const SymMatrix& m) : p_(m.dim()), l_(p_ * p_, 0.0) {
  for (std::size_t i = 0; i < p_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = m(i, j);
      const double* li = l_.data() + i * p_;
      const double* lj = l_.data() + j * p_;
      for (std::size_t k = 0; k < j; ++k) acc -= li[k] * lj[k];
      if (i == j) {
        if (!(acc > 0.0))  // also rejects NaN
          throw NotPositiveDefinite("Cholesky: non-positive pivot at index " + std::to_string(i), i);
        l_[i * p_ + i] = std::sqrt(acc);
      } else {
        l_[i * p_ + j] = acc / lj[j];
      }
    }
  }
}

double Cholesky::logdet() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < p_; ++i) acc += std::log(l_[i * p_ + i]);
  return 2.0 * acc;
}

std::vector<double> Cholesky::solve(std::span<const double> b) const {
  if (b.size() != p_) throw std::invalid_argument("Cholesky::solve: dimension mismatch");
  std::vector<double> y(b.begin(), b.end());
  // forward: L y = b
  for (std::size_t i = 0; i < p_; ++i) {
    const double* li = l_.data() + i * p_;
    double acc = y[i];
    for (std::size_t k = 0; k < i; ++k) acc -= li[k] * y[k];
    y[i] = acc / li[i];
  }
  // backward: L^T x = y
  for (std::size_t ii = p_; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t k = ii + 1; k < p_; ++k) acc -= l_[k * p_ + ii] * y[k];
    y[ii] = acc / l_[ii * p_ + ii];
  }
  return y;
}

std::vector<double> Cholesky::solve_transposed(std::span<const double> z) const {
  if (z.size() != p_) throw std::invalid_argument("Cholesky::solve_transposed: dimension mismatch");
  std::vector<double> x(z.begin(), z.end());
  for (std::size_t ii = p_; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t k = ii + 1; k < p_; ++k) acc -= l_[k * p_ + ii] * x[k];
    x[ii] = acc / l_[ii * p_ + ii];
  }
  return x;
}

double chol_logdet(const SymMatrix& m) { return Cholesky(m).logdet(); }

}  // namespace glasso
