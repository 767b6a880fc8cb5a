#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posgain/cones.hpp"
#include "posgain/lti.hpp"
#include "posgain/posnorm.hpp"

namespace posgain {

// x(k+1) = Lambda x(k) + Win w(k) + v(k),  z(k) = Wout x(k),
// w(k) = relu(z(k) + s(k)), x(0) = 0.
class RnnModel {
 public:
  // Throws UnstableSystem unless Lambda is Schur stable; DimensionError on
  // inconsistent shapes (Lambda n x n, Win n x m, Wout m x n).
  RnnModel(Matrix lambda, Matrix win, Matrix wout);

  const Matrix& lambda() const { return lambda_; }
  const Matrix& win() const { return win_; }
  const Matrix& wout() const { return wout_; }
  int state_dim() const { return lambda_.rows(); }
  int channel_dim() const { return wout_.rows(); }

 private:
  Matrix lambda_, win_, wout_;
};

std::vector<double> relu(const std::vector<double>& v);

// The three loop subsystems: g is (Lambda, [Win I], Wout, 0) mapping the
// stacked disturbance (w; v) to z; g0 = (Lambda, Win, Wout, 0) closes the
// loop through the ReLU; g1 = (Lambda, I, Wout, 0) carries v alone.
struct RnnSubsystems {
  StateSpace g, g0, g1;
};

RnnSubsystems subsystems(const RnnModel& rnn);

struct RnnTrajectory {
  Signal x, z, w;  // w is entrywise nonnegative by construction
};

// Exact recursion over steps 0..horizon-1; s has m channels, v has n.
RnnTrajectory simulate_rnn(const RnnModel& rnn, const Signal& s, const Signal& v,
                           int horizon);

// Decision-vector layout of the scaled small-gain program: triangle of P
// (n x n), then the m diagonal scalings S, then Q1/Q2 when with_cop.
struct SsgLayout {
  int n = 0;
  int m = 0;
  int p_offset = 0;
  int s_offset = 0;
  int q1_offset = -1;
  int q2_offset = -1;
  int num_vars = 0;
};

// Scaled small-gain LMI
//
//   blockdiag(-P, -S + Q) + [Lambda Win; Wout 0]^T blockdiag(P, S) [Lambda Win; Wout 0] < 0
//
// with P psd, S diagonal bounded below by 1e-6 I (the strict positive
// diagonal cone), and Q = Q1 + Q2 (Q1 psd, Q2 entrywise nonnegative) when
// with_cop, Q = 0 otherwise.
ConicProgram ssg_lmi(const RnnModel& rnn, bool with_cop, SsgLayout* layout = nullptr);

enum class FeasStatus { Feasible, Infeasible, Indeterminate };

struct SsgWitness {
  SymMatrix p;
  std::vector<double> s;  // diagonal entries
  SymMatrix q1, q2;       // zero-dim for the plain variant
};

struct StabilityVerdict {
  FeasStatus ssg = FeasStatus::Indeterminate;      // Q = 0 variant
  FeasStatus ssg_cop = FeasStatus::Indeterminate;  // copositive-multiplier variant
  std::optional<SsgWitness> ssg_witness;
  std::optional<SsgWitness> ssg_cop_witness;
  // Gain analysis (skipped when CertifyOptions::compute_gains is false):
  std::optional<double> gamma0_pos;  // upper bound on |G0| positive gain
  std::optional<double> gamma1;      // |G1| l2 gain
  std::optional<double> certified_gain;  // present iff ssg_cop feasible and gamma0_pos < 1
  std::vector<std::string> notes;    // solver failures and skipped steps
};

struct CertifyOptions {
  int lift_order = 4;   // lifting order for the gamma0_pos estimate
  double tol = 1e-4;
  bool compute_gains = true;
};

// Runs both small-gain feasibility tests and, when the copositive variant
// is feasible and gains are requested, evaluates the closed-loop gain bound
//   sqrt(2) |[[g0/(1-g0), g1/(1-g0)], [1/(1-g0), g1/(1-g0)]]|_2
// with g0 = gamma0_pos and g1 = gamma1. Solver failures surface as
// Indeterminate, never as Infeasible.
StabilityVerdict certify(const RnnModel& rnn, const CertifyOptions& opts = {});

// Samples `trials` random tuples satisfying |z| <= a|s| + b|v| and
// |w| <= c|s| + d|v| (built by scaling random directions) and verifies
// |(z; w)| <= sqrt(2) |[[a, b], [c, d]]|_2 |(s; v)|. a,b,c,d >= 0.
bool gain_combination_lemma_check(double a, double b, double c, double d, int trials,
                                  unsigned seed = 0);

enum class CellClass { Both, CopOnly, Neither, Indeterminate };

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 1;  // number of grid points; 1 pins the axis at lo
};

struct SweepCell {
  double a = 0.0;
  double b = 0.0;
  CellClass cls = CellClass::Indeterminate;
};

// Grid sweep over the two perturbation parameters: entry (0, 2) of Win is
// offset by a and entry (2, 1) is replaced by b, then both small-gain tests
// run (feasibility only). Cells are evaluated concurrently and returned in
// row-major (a, then b) order.
std::vector<SweepCell> region_sweep(const RnnModel& base, const AxisRange& a_range,
                                    const AxisRange& b_range);

}  // namespace posgain
