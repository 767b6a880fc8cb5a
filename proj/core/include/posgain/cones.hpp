#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posgain/matrix.hpp"

namespace posgain {

// PSDplusNN and DNN are composite tags; solve() expands them into PSD/NN
// primitives (variable split for PSDplusNN, duplicated map for DNN). COP is
// rejected at solve time with UnsupportedCone.
enum class ConeKind { PSD, NN, PSDplusNN, DNN, COP };

// Orientation of an affine constraint. GreaterEq means F(x) - margin*I is a
// cone member; LessEq means -F(x) - margin*I is. A strict LMI "F(x) < 0"
// is therefore (LessEq, margin = eps).
enum class Sense { GreaterEq, LessEq };

struct AffineTerm {
  int var;
  SymMatrix coeff;
};

struct ConicConstraint {
  ConeKind cone = ConeKind::PSD;
  Sense sense = Sense::GreaterEq;
  double margin = 0.0;
  SymMatrix f0;
  std::vector<AffineTerm> terms;
  std::string label;

  int dim() const { return f0.dim(); }
};

// minimize c.x subject to affine symmetric-matrix cone constraints.
struct ConicProgram {
  int num_vars = 0;
  std::vector<double> objective;  // empty or all-zero means feasibility only
  std::vector<ConicConstraint> constraints;

  int add_variables(int count);
  // The returned reference is invalidated by the next add_constraint call;
  // populate terms before adding another constraint.
  ConicConstraint& add_constraint(ConeKind cone, SymMatrix f0,
                                  Sense sense = Sense::GreaterEq, double margin = 0.0,
                                  std::string label = "");
  // Evaluates constraint maps F0 + sum x_i F_i at x (original orientation).
  SymMatrix constraint_value(int idx, const std::vector<double>& x) const;
};

// Packing convention for symmetric-matrix decision variables: the upper
// triangle of a dim x dim block occupies sym_dim(dim) consecutive scalars,
// row by row. sym_slot gives the offset of entry (r, c), r <= c; sym_basis
// is the coefficient of that scalar (1 at (r,c) and (c,r)).
int sym_slot(int dim, int r, int c);
SymMatrix sym_basis(int dim, int r, int c);
SymMatrix unpack_sym(const std::vector<double>& x, int offset, int dim);

enum class SolveStatus { Optimal, Feasible, Infeasible, MaxIterations, NumericalFailure };

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> x;
  // Constraint map values at x, one per original constraint.
  std::vector<SymMatrix> witnesses;
  // For PSDplusNN constraints, the NN part of the split; nullopt elsewhere.
  std::vector<std::optional<SymMatrix>> nn_split;
  double max_violation = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  std::string message;

  bool feasible() const {
    return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
  }
};

struct SolveOptions {
  double feas_tol = 1e-7;    // feasibility classification threshold on t*
  double opt_tol = 1e-9;     // target for gap and residuals
  double accept_tol = 1e-7;  // best-iterate acceptance when the target is missed
  int max_iterations = 150;
};

SolveResult solve(const ConicProgram& prog, const SolveOptions& opts = {});

bool in_psd(const SymMatrix& s, double tol);
bool in_nn(const SymMatrix& s, double tol);

struct SplitWitness {
  bool member = false;
  SymMatrix psd_part, nn_part;
  explicit operator bool() const { return member; }
};

// Minkowski-sum membership S in PSD+NN via a feasibility SDP; returns the
// split S = psd_part + nn_part when a member.
SplitWitness in_psd_plus_nn(const SymMatrix& s, double tol);

// Closed form: s11 >= 0, s22 >= 0, s12 + sqrt(s11 s22) >= 0.
bool is_copositive_2x2(const SymMatrix& s);

// Samples x^T S x on the simplex grid {x >= 0, sum x = 1} at the given
// resolution. One-sided: false (a sample below -1e-9) is conclusive,
// true is only evidence. dim <= 6.
bool cop_bruteforce(const SymMatrix& s, int grid_resolution);

}  // namespace posgain
