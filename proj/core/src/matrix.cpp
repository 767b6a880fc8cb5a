#include "posgain/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "posgain/errors.hpp"

namespace posgain {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
  data_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
  if (data_.size() != static_cast<size_t>(rows) * cols)
    throw DimensionError("entry count does not match rows*cols");
  check_finite();
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
  data_.reserve(static_cast<size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_) throw DimensionError("ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  check_finite();
}

void Matrix::check_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) throw InvalidInput("non-finite matrix entry");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::zeros(int rows, int cols) { return Matrix(rows, cols); }

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw DimensionError("matmul dimension mismatch");
  Matrix out(rows_, rhs.cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int k = 0; k < cols_; ++k) {
      double a = (*this)(r, k);
      if (a == 0.0) continue;
      const double* rhsrow = &rhs.data_[static_cast<size_t>(k) * rhs.cols_];
      double* outrow = &out.data_[static_cast<size_t>(r) * rhs.cols_];
      for (int c = 0; c < rhs.cols_; ++c) outrow[c] += a * rhsrow[c];
    }
  }
  return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionError("add dimension mismatch");
  Matrix out = *this;
  for (size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
  return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionError("sub dimension mismatch");
  Matrix out = *this;
  for (size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
  return out;
}

Matrix Matrix::scaled(double s) const {
  Matrix out = *this;
  for (double& v : out.data_) v *= s;
  return out;
}

void Matrix::set_block(int r0, int c0, const Matrix& src) {
  if (r0 < 0 || c0 < 0 || r0 + src.rows_ > rows_ || c0 + src.cols_ > cols_)
    throw DimensionError("set_block out of range");
  for (int r = 0; r < src.rows_; ++r)
    for (int c = 0; c < src.cols_; ++c) (*this)(r0 + r, c0 + c) = src(r, c);
}

Matrix Matrix::block(int r0, int c0, int rows, int cols) const {
  if (r0 < 0 || c0 < 0 || r0 + rows > rows_ || c0 + cols > cols_)
    throw DimensionError("block out of range");
  Matrix out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
  return out;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double s = 0.0;
  for (double v : data_) s = std::max(s, std::fabs(v));
  return s;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("hcat row mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  out.set_block(0, 0, a);
  out.set_block(0, a.cols(), b);
  return out;
}

Matrix vcat(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("vcat column mismatch");
  Matrix out(a.rows() + b.rows(), a.cols());
  out.set_block(0, 0, a);
  out.set_block(a.rows(), 0, b);
  return out;
}

Matrix mat_pow(const Matrix& a, int k) {
  if (!a.is_square()) throw DimensionError("mat_pow needs a square matrix");
  if (k < 0) throw InvalidInput("negative matrix power");
  Matrix out = Matrix::identity(a.rows());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != m.cols()) throw DimensionError("mat_vec dimension mismatch");
  std::vector<double> out(m.rows(), 0.0);
  for (int r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (int c = 0; c < m.cols(); ++c) s += m(r, c) * v[c];
    out[r] = s;
  }
  return out;
}

SymMatrix::SymMatrix(int dim) : dim_(dim) {
  if (dim < 0) throw DimensionError("negative matrix dimension");
  data_.assign(static_cast<size_t>(dim) * dim, 0.0);
}

SymMatrix::SymMatrix(const Matrix& m) : dim_(m.rows()) {
  if (!m.is_square()) throw DimensionError("SymMatrix needs a square source");
  data_.assign(static_cast<size_t>(dim_) * dim_, 0.0);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c)
      data_[static_cast<size_t>(r) * dim_ + c] = 0.5 * (m(r, c) + m(c, r));
  for (double v : data_)
    if (!std::isfinite(v)) throw InvalidInput("non-finite matrix entry");
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : SymMatrix(Matrix(rows)) {}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix s(n);
  for (int i = 0; i < n; ++i) s.set(i, i, 1.0);
  return s;
}

void SymMatrix::set(int r, int c, double v) {
  data_[static_cast<size_t>(r) * dim_ + c] = v;
  data_[static_cast<size_t>(c) * dim_ + r] = v;
}

void SymMatrix::add(int r, int c, double v) {
  data_[static_cast<size_t>(r) * dim_ + c] += v;
  if (r != c) data_[static_cast<size_t>(c) * dim_ + r] += v;
}

Matrix SymMatrix::to_matrix() const { return Matrix(dim_, dim_, data_); }

SymMatrix SymMatrix::operator+(const SymMatrix& rhs) const {
  if (dim_ != rhs.dim_) throw DimensionError("add dimension mismatch");
  SymMatrix out = *this;
  for (size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
  return out;
}

SymMatrix SymMatrix::operator-(const SymMatrix& rhs) const {
  if (dim_ != rhs.dim_) throw DimensionError("sub dimension mismatch");
  SymMatrix out = *this;
  for (size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
  return out;
}

SymMatrix SymMatrix::scaled(double s) const {
  SymMatrix out = *this;
  for (double& v : out.data_) v *= s;
  return out;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double SymMatrix::max_abs() const {
  double s = 0.0;
  for (double v : data_) s = std::max(s, std::fabs(v));
  return s;
}

double SymMatrix::min_entry() const {
  double s = data_.empty() ? 0.0 : data_[0];
  for (double v : data_) s = std::min(s, v);
  return s;
}

double SymMatrix::trace() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

}  // namespace posgain
