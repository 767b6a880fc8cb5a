#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posgain/matrix.hpp"

namespace posgain {

struct EigResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // orthonormal columns, vectors.col(i) pairs values[i]
};

// Symmetric eigendecomposition by cyclic Jacobi rotations.
EigResult sym_eig(const SymMatrix& s);

double spectral_norm(const Matrix& m);

struct PerronResult {
  std::vector<double> v;  // unit, entrywise >= 0
  bool degenerate;        // input was (numerically) the zero matrix
};

// Unit eigenvector of the maximal eigenvalue, sign-fixed and clamped to the
// nonnegative orthant. With require_nonneg, entries of z below -1e-9 raise
// NotNonnegative; smaller violations are clamped to 0 before extraction.
PerronResult perron_vector(const SymMatrix& z, bool require_nonneg);

struct SchurResult {
  bool stable;
  SymMatrix p;  // Lyapunov witness A^T P A - P = -I when stable
  std::string diagnostic;
  explicit operator bool() const { return stable; }
};

// Schur stability via the discrete Lyapunov equation solved as a vectorized
// linear system; stable iff the solve succeeds with lambda_min(P) > 1e-9.
SchurResult is_schur_stable(const Matrix& a);

// Cholesky factor of a symmetric matrix; nullopt when not positive definite.
std::optional<Matrix> cholesky(const SymMatrix& s);

// Dense LU solve with partial pivoting; nullopt on (near-)singular systems.
std::optional<std::vector<double>> lu_solve(Matrix a, std::vector<double> b);

double vec_norm(const std::vector<double>& v);

}  // namespace posgain
