#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posgain/cones.hpp"
#include "posgain/lti.hpp"

namespace posgain {

// Decision-vector layout of the gain LMI program: the upper triangle of P
// (nx x nx), then, when Q is present, the triangles of Q1 and Q2 (nw x nw).
struct GainLmiLayout {
  int nx = 0;
  int nw = 0;
  int p_offset = 0;
  int q1_offset = -1;
  int q2_offset = -1;
  int num_vars = 0;
};

// Affine family in (P, Q1, Q2):
//
//   L = blockdiag(-P, -gamma^2 I + Q) + [A B; C D]^T blockdiag(P, I) [A B; C D]
//
// constrained L <= -eps*I with eps = 1e-8 (1 + |L(0)|_2), P psd and, when
// with_q, Q = Q1 + Q2 with Q1 psd and Q2 entrywise nonnegative. with_q =
// false drops the Q variables entirely (plain bounded-real form).
ConicProgram build_gain_lmi(const StateSpace& sys, double gamma, bool with_q,
                            GainLmiLayout* layout = nullptr);

struct GainCertificate {
  double gamma = 0.0;
  int order = 1;   // lifting order the LMI was built at
  SymMatrix p;     // psd witness
  SymMatrix q1;    // psd part of Q; zero-dim when the plain LMI was solved
  SymMatrix q2;    // nonnegative part of Q
};

struct CertCheck {
  bool ok = false;
  std::string violated;  // failing clause, empty when ok
  explicit operator bool() const { return ok; }
};

// Solver-free replay: rebuilds the order-cert.order lifted LMI value at the
// witness and re-checks every cone membership through numkernel alone.
CertCheck verify_certificate(const StateSpace& sys, const GainCertificate& cert,
                             double tol = 1e-7);

// Composes the order-N certificate to order p*N (same P, p diagonal copies
// of Q, same gamma) and replays the composed certificate. p = 1 reduces to
// verify_certificate.
CertCheck theorem2_composition_check(const StateSpace& sys, int order, int p,
                                     const GainCertificate& cert);

// l2-induced norm by bisection over the bounded-real LMI (Q = 0). The
// bracket starts at |D|_2 and grows by doubling; terminates when its width
// drops below tol*(1+gamma). Throws UnstableSystem.
double hinf_norm(const StateSpace& sys, double tol = 1e-4);

// Certified upper bound on the positive l2 gain from the order-N lifting
// with the PSD+NN copositivity relaxation. Returns the bisection's last
// certified-feasible gamma; cert, when given, receives a replayable
// certificate for it. bracket_hint seeds the upper bracket (it is solved
// before being trusted). Throws UnstableSystem; throws SolverFailure when
// no feasible bracket can be established.
double upper_bound_pos(const StateSpace& sys, int order, double tol = 1e-4,
                       GainCertificate* cert = nullptr,
                       const double* bracket_hint = nullptr);

struct LowerBoundWitness {
  int order = 1;
  SymMatrix z_star;            // relaxation optimizer, trace 1, doubly nonnegative
  std::vector<double> v_star;  // nonnegative unit vector extracted from z_star
  double value = 0.0;          // |hatD v_star|_2
  double sdp_value = 0.0;      // sqrt of the relaxation optimum, >= value
  bool rank_one_exact = false; // lambda_2/lambda_1 of z_star <= 1e-6
};

// Lower bound on the positive l2 gain: maximizes trace(hatD^T hatD Z) over
// trace-one doubly nonnegative Z, then rounds Z to a feasible input (Perron
// vector of Z against the best canonical basis vector). tol gates the
// accepted relative duality gap. Throws SolverFailure when the relaxation
// cannot be solved.
double lower_bound_pos(const StateSpace& sys, int order, double tol = 1e-4,
                       LowerBoundWitness* witness = nullptr);

// Exact positive matrix norm max{ |Mv|_2 : v >= 0, |v|_2 = 1 } for matrices
// with at most 4 columns, where the copositive cone equals PSD+NN: bisects
// gamma over membership of gamma^2 I - M^T M. Throws ColumnCountExceeded.
double pos_matnorm_exact_small(const Matrix& m, double tol = 1e-6);

// Monte-Carlo lower estimate of the positive matrix norm: max of |Mv|_2
// over `samples` random nonnegative unit vectors, all canonical basis
// vectors, and the clamped top right singular vector. cols <= 20.
double pos_matnorm_bruteforce(const Matrix& m, int samples, unsigned seed = 0);

struct BoundRow {
  int order = 0;
  std::optional<double> upper;  // empty when the per-order solve failed
  std::optional<double> lower;
};

struct BoundReport {
  double hinf = 0.0;
  std::vector<BoundRow> rows;  // one per order 1..max_order
  std::optional<double> best_upper;
  std::optional<double> best_lower;
  std::vector<std::string> warnings;  // per-order failures, sweep continues
};

// hinf_norm once, then upper and lower positive-gain bounds for every
// lifting order in [1, max_order]. Upper bounds run in order and reuse the
// previous order's value as a bracket hint; lower bounds are independent
// and evaluated concurrently. Throws UnstableSystem.
BoundReport bound_sweep(const StateSpace& sys, int max_order, double tol = 1e-4);

}  // namespace posgain
