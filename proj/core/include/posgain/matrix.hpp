#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace posgain {

// Dense real matrix, row-major. Construction rejects NaN/Inf entries.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols);
  Matrix(int rows, int cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int n);
  static Matrix zeros(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const;
  Matrix operator*(const Matrix& rhs) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator-(const Matrix& rhs) const;
  Matrix scaled(double s) const;

  // Writes src into this starting at (r0, c0); bounds-checked.
  void set_block(int r0, int c0, const Matrix& src);
  Matrix block(int r0, int c0, int rows, int cols) const;

  double frobenius_norm() const;
  double max_abs() const;

 private:
  int rows_, cols_;
  std::vector<double> data_;

  void check_finite() const;
};

Matrix hcat(const Matrix& a, const Matrix& b);
Matrix vcat(const Matrix& a, const Matrix& b);
Matrix mat_pow(const Matrix& a, int k);
std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v);

// Symmetric matrix stored dense; construction symmetrizes via (M + M^T)/2
// so entry(i,j) == entry(j,i) holds exactly.
class SymMatrix {
 public:
  SymMatrix() : dim_(0) {}
  explicit SymMatrix(int dim);
  explicit SymMatrix(const Matrix& m);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix identity(int n);

  int dim() const { return dim_; }

  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * dim_ + c]; }
  // Symmetric write: sets (r,c) and (c,r).
  void set(int r, int c, double v);
  void add(int r, int c, double v);

  const std::vector<double>& data() const { return data_; }

  Matrix to_matrix() const;
  SymMatrix operator+(const SymMatrix& rhs) const;
  SymMatrix operator-(const SymMatrix& rhs) const;
  SymMatrix scaled(double s) const;

  double frobenius_norm() const;
  double max_abs() const;
  double min_entry() const;
  double trace() const;

 private:
  int dim_;
  std::vector<double> data_;
};

// Number of free entries of a dim x dim symmetric matrix.
inline int sym_dim(int dim) { return dim * (dim + 1) / 2; }

}  // namespace posgain
