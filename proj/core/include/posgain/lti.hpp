#pragma once

#include <cstdint>
#include <vector>

#include "posgain/matrix.hpp"

namespace posgain {

// Discrete-time LTI system x(k+1) = A x(k) + B w(k), z(k) = C x(k) + D w(k),
// x(0) = 0.
struct StateSpace {
  Matrix A, B, C, D;

  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d);

  int n() const { return A.rows(); }
  int nw() const { return B.cols(); }
  int nz() const { return C.rows(); }
};

// N-step lifted quadruple. hatA = A^N, hatB the reversed controllability
// row, hatC the observability column, hatD the block lower-triangular
// Toeplitz impulse-response matrix with D on the diagonal.
struct LiftedSystem {
  int order;
  Matrix hatA, hatB, hatC, hatD;
};

// Finite-horizon multichannel signal; samples[k] is the value at step k.
struct Signal {
  int channels = 0;
  std::vector<std::vector<double>> samples;

  Signal() = default;
  Signal(int ch, int length) : channels(ch), samples(length, std::vector<double>(ch, 0.0)) {}

  int length() const { return static_cast<int>(samples.size()); }
  double l2_norm() const;
  bool entrywise_nonneg(double tol = 0.0) const;

  static Signal zeros(int ch, int length) { return Signal(ch, length); }
  // All channels 1 at k = 0, zero after.
  static Signal impulse(int ch, int length);
  // All channels 1 at every step.
  static Signal step(int ch, int length);
  // Entrywise |N(0,1)| draws, reproducible from the seed.
  static Signal random_nonneg(int ch, int length, uint64_t seed);
};

struct SimResult {
  Signal z, x;
};

// Exact recursion over K steps; w must provide at least K samples.
SimResult simulate(const StateSpace& sys, const Signal& w, int k_steps);

LiftedSystem lift(const StateSpace& sys, int n_order);

// View of the lifted quadruple as a plain system (for simulation and LMIs).
StateSpace lifted_to_statespace(const LiftedSystem& ls);

// Verifies the four block identities relating lifts of order N1, N2 and
// N1+N2 (composition of lifting) entrywise to tol.
bool lifting_identities_check(const StateSpace& sys, int n1, int n2, double tol = 1e-10);

// Reblocks w into super-samples of N steps; zero-pads a non-divisible tail.
Signal pack_signal(const Signal& w, int n_order);
Signal unpack_signal(const Signal& packed, int nw, int n_order);

}  // namespace posgain
