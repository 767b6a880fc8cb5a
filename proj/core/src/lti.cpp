#include "posgain/lti.hpp"

#include <cmath>
#include <random>

#include "posgain/errors.hpp"

namespace posgain {

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  if (!A.is_square()) throw DimensionError("A must be square");
  if (B.rows() != A.rows()) throw DimensionError("B row count must match A");
  if (C.cols() != A.rows()) throw DimensionError("C column count must match A");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw DimensionError("D must be nz x nw");
}

double Signal::l2_norm() const {
  double s = 0.0;
  for (const auto& v : samples)
    for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool Signal::entrywise_nonneg(double tol) const {
  for (const auto& v : samples)
    for (double x : v)
      if (x < -tol) return false;
  return true;
}

Signal Signal::impulse(int ch, int length) {
  Signal s(ch, length);
  if (length > 0)
    for (int c = 0; c < ch; ++c) s.samples[0][c] = 1.0;
  return s;
}

Signal Signal::step(int ch, int length) {
  Signal s(ch, length);
  for (auto& v : s.samples)
    for (double& x : v) x = 1.0;
  return s;
}

Signal Signal::random_nonneg(int ch, int length, uint64_t seed) {
  Signal s(ch, length);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : s.samples)
    for (double& x : v) x = std::fabs(dist(rng));
  return s;
}

SimResult simulate(const StateSpace& sys, const Signal& w, int k_steps) {
  if (w.channels != sys.nw()) throw DimensionError("input channel count != nw");
  if (w.length() < k_steps) throw DimensionError("input shorter than horizon");
  if (k_steps < 0) throw InvalidInput("negative horizon");

  SimResult out;
  out.x = Signal(sys.n(), k_steps);
  out.z = Signal(sys.nz(), k_steps);
  std::vector<double> x(sys.n(), 0.0);
  for (int k = 0; k < k_steps; ++k) {
    out.x.samples[k] = x;
    const auto& wk = w.samples[k];
    for (int r = 0; r < sys.nz(); ++r) {
      double s = 0.0;
      for (int c = 0; c < sys.n(); ++c) s += sys.C(r, c) * x[c];
      for (int c = 0; c < sys.nw(); ++c) s += sys.D(r, c) * wk[c];
      out.z.samples[k][r] = s;
    }
    std::vector<double> xn(sys.n(), 0.0);
    for (int r = 0; r < sys.n(); ++r) {
      double s = 0.0;
      for (int c = 0; c < sys.n(); ++c) s += sys.A(r, c) * x[c];
      for (int c = 0; c < sys.nw(); ++c) s += sys.B(r, c) * wk[c];
      xn[r] = s;
    }
    x = std::move(xn);
  }
  return out;
}

LiftedSystem lift(const StateSpace& sys, int n_order) {
  if (n_order < 1) throw InvalidOrder("lifting order must be >= 1");
  int n = sys.n(), nw = sys.nw(), nz = sys.nz(), N = n_order;

  // Powers A^0 .. A^N by repeated multiplication (exact block identities).
  std::vector<Matrix> ap;
  ap.reserve(N + 1);
  ap.push_back(Matrix::identity(n));
  for (int k = 1; k <= N; ++k) ap.push_back(ap.back() * sys.A);

  LiftedSystem ls;
  ls.order = N;
  ls.hatA = ap[N];

  ls.hatB = Matrix(n, N * nw);
  for (int j = 0; j < N; ++j) ls.hatB.set_block(0, j * nw, ap[N - 1 - j] * sys.B);

  ls.hatC = Matrix(N * nz, n);
  for (int i = 0; i < N; ++i) ls.hatC.set_block(i * nz, 0, sys.C * ap[i]);

  ls.hatD = Matrix(N * nz, N * nw);
  for (int i = 0; i < N; ++i) {
    ls.hatD.set_block(i * nz, i * nw, sys.D);
    for (int j = 0; j < i; ++j)
      ls.hatD.set_block(i * nz, j * nw, sys.C * ap[i - j - 1] * sys.B);
  }
  return ls;
}

StateSpace lifted_to_statespace(const LiftedSystem& ls) {
  return StateSpace(ls.hatA, ls.hatB, ls.hatC, ls.hatD);
}

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).max_abs();
}

}  // namespace

bool lifting_identities_check(const StateSpace& sys, int n1, int n2, double tol) {
  if (n1 < 1 || n2 < 1) throw InvalidOrder("lifting orders must be >= 1");
  LiftedSystem l1 = lift(sys, n1);
  LiftedSystem l2 = lift(sys, n2);
  LiftedSystem l12 = lift(sys, n1 + n2);

  if (max_abs_diff(l2.hatA * l1.hatA, l12.hatA) > tol) return false;
  if (max_abs_diff(hcat(l2.hatA * l1.hatB, l2.hatB), l12.hatB) > tol) return false;
  if (max_abs_diff(vcat(l1.hatC, l2.hatC * l1.hatA), l12.hatC) > tol) return false;

  Matrix d12(l12.hatD.rows(), l12.hatD.cols());
  d12.set_block(0, 0, l1.hatD);
  d12.set_block(l1.hatD.rows(), 0, l2.hatC * l1.hatB);
  d12.set_block(l1.hatD.rows(), l1.hatD.cols(), l2.hatD);
  if (max_abs_diff(d12, l12.hatD) > tol) return false;
  return true;
}

Signal pack_signal(const Signal& w, int n_order) {
  if (n_order < 1) throw InvalidOrder("pack order must be >= 1");
  int N = n_order;
  int steps = (w.length() + N - 1) / N;
  Signal out(w.channels * N, steps);
  for (int k = 0; k < w.length(); ++k) {
    int super = k / N, slot = k % N;
    for (int c = 0; c < w.channels; ++c)
      out.samples[super][slot * w.channels + c] = w.samples[k][c];
  }
  return out;
}

Signal unpack_signal(const Signal& packed, int nw, int n_order) {
  if (n_order < 1) throw InvalidOrder("unpack order must be >= 1");
  if (packed.channels != nw * n_order)
    throw DimensionError("packed channel count != nw * N");
  Signal out(nw, packed.length() * n_order);
  for (int k = 0; k < packed.length(); ++k)
    for (int slot = 0; slot < n_order; ++slot)
      for (int c = 0; c < nw; ++c)
        out.samples[k * n_order + slot][c] = packed.samples[k][slot * nw + c];
  return out;
}

}  // namespace posgain
