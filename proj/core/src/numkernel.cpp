#include "posgain/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "posgain/errors.hpp"

namespace posgain {

namespace {

double off_diag_norm(const Matrix& a) {
  double s = 0.0;
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      if (r != c) s += a(r, c) * a(r, c);
  return std::sqrt(s);
}

}  // namespace

EigResult sym_eig(const SymMatrix& s) {
  int n = s.dim();
  if (n < 1) throw InvalidInput("sym_eig on empty matrix");
  Matrix a = s.to_matrix();
  Matrix v = Matrix::identity(n);
  double scale = 1.0 + s.frobenius_norm();

  // Cyclic Jacobi. Quadratic convergence makes 60 sweeps far more than
  // needed for the <= 50x50 problems this library sees.
  for (int sweep = 0; sweep < 60; ++sweep) {
    if (off_diag_norm(a) <= 1e-12 * scale) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        double app = a(p, p), aqq = a(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double sn = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  EigResult out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (int i = 0; i < n; ++i) {
    out.values[i] = a(order[i], order[i]);
    for (int k = 0; k < n; ++k) out.vectors(k, i) = v(k, order[i]);
  }
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  // Work with the smaller Gram matrix.
  Matrix g = m.cols() <= m.rows() ? m.transpose() * m : m * m.transpose();
  EigResult e = sym_eig(SymMatrix(g));
  double lam = e.values.back();
  return lam > 0.0 ? std::sqrt(lam) : 0.0;
}

PerronResult perron_vector(const SymMatrix& z, bool require_nonneg) {
  int n = z.dim();
  if (n < 1) throw InvalidInput("perron_vector on empty matrix");
  SymMatrix zc = z;
  if (require_nonneg) {
    if (z.min_entry() < -1e-9) throw NotNonnegative("matrix has entries below -1e-9");
    Matrix m = z.to_matrix();
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        if (m(r, c) < 0.0) m(r, c) = 0.0;
    zc = SymMatrix(m);
  }

  PerronResult out;
  out.v.assign(n, 0.0);
  if (zc.max_abs() <= 1e-300) {
    out.v[0] = 1.0;
    out.degenerate = true;
    return out;
  }
  out.degenerate = false;

  EigResult e = sym_eig(zc);
  int top = n - 1;
  for (int k = 0; k < n; ++k) out.v[k] = e.vectors(k, top);
  int imax = 0;
  for (int k = 1; k < n; ++k)
    if (std::fabs(out.v[k]) > std::fabs(out.v[imax])) imax = k;
  if (out.v[imax] < 0.0)
    for (double& x : out.v) x = -x;
  for (double& x : out.v)
    if (x < 0.0) x = 0.0;  // residual components are O(1e-9) for DNN inputs
  double nrm = vec_norm(out.v);
  if (nrm <= 1e-300) {
    out.v.assign(n, 0.0);
    out.v[0] = 1.0;
    out.degenerate = true;
    return out;
  }
  for (double& x : out.v) x /= nrm;
  return out;
}

SchurResult is_schur_stable(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("is_schur_stable needs a square matrix");
  int n = a.rows();
  SchurResult out{false, SymMatrix(n), ""};
  if (n == 0) {
    out.stable = true;
    return out;
  }

  // Vectorize A^T P A - P = -I as (kron(A^T, A^T) - I) vec(P) = -vec(I).
  int n2 = n * n;
  Matrix k(n2, n2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) k(i * n + p, j * n + q) = a(j, i) * a(q, p);
  for (int i = 0; i < n2; ++i) k(i, i) -= 1.0;
  std::vector<double> rhs(n2, 0.0);
  for (int i = 0; i < n; ++i) rhs[i * n + i] = -1.0;

  auto sol = lu_solve(k, rhs);
  if (!sol) {
    out.diagnostic = "singular Lyapunov system (eigenvalue product on the unit circle)";
    return out;
  }
  Matrix p(n, n, *sol);
  out.p = SymMatrix(p);
  EigResult e = sym_eig(out.p);
  if (e.values.front() > 1e-9) {
    out.stable = true;
  } else {
    out.diagnostic = "Lyapunov solution not positive definite";
  }
  return out;
}

std::optional<Matrix> cholesky(const SymMatrix& s) {
  int n = s.dim();
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = s(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0 || !std::isfinite(d)) return std::nullopt;
    double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

std::optional<std::vector<double>> lu_solve(Matrix a, std::vector<double> b) {
  if (!a.is_square() || a.rows() != static_cast<int>(b.size()))
    throw DimensionError("lu_solve dimension mismatch");
  int n = a.rows();
  std::vector<int> piv(n);
  std::iota(piv.begin(), piv.end(), 0);
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(best, col))) best = r;
    if (std::fabs(a(best, col)) < 1e-13) return std::nullopt;
    if (best != col) {
      for (int c = 0; c < n; ++c) std::swap(a(col, c), a(best, c));
      std::swap(b[col], b[best]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a(r, c) * b[c];
    b[r] = s / a(r, r);
  }
  return b;
}

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace posgain
