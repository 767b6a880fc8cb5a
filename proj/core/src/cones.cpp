#include "posgain/cones.hpp"

#include <cmath>

#include "posgain/errors.hpp"
#include "posgain/numkernel.hpp"

namespace posgain {

int ConicProgram::add_variables(int count) {
  int first = num_vars;
  num_vars += count;
  objective.resize(num_vars, 0.0);
  return first;
}

ConicConstraint& ConicProgram::add_constraint(ConeKind cone, SymMatrix f0, Sense sense,
                                              double margin, std::string label) {
  ConicConstraint c;
  c.cone = cone;
  c.sense = sense;
  c.margin = margin;
  c.f0 = std::move(f0);
  c.label = std::move(label);
  constraints.push_back(std::move(c));
  return constraints.back();
}

SymMatrix ConicProgram::constraint_value(int idx, const std::vector<double>& x) const {
  const ConicConstraint& c = constraints[idx];
  SymMatrix v = c.f0;
  for (const AffineTerm& t : c.terms) {
    if (t.coeff.dim() != v.dim()) throw DimensionError("constraint term dimension mismatch");
    double xi = x[t.var];
    if (xi == 0.0) continue;
    v = v + t.coeff.scaled(xi);
  }
  return v;
}

int sym_slot(int dim, int r, int c) {
  return r * dim - r * (r - 1) / 2 + (c - r);
}

SymMatrix sym_basis(int dim, int r, int c) {
  SymMatrix b(dim);
  b.set(r, c, 1.0);
  return b;
}

SymMatrix unpack_sym(const std::vector<double>& x, int offset, int dim) {
  SymMatrix s(dim);
  for (int r = 0; r < dim; ++r)
    for (int c = r; c < dim; ++c) s.set(r, c, x[offset + sym_slot(dim, r, c)]);
  return s;
}

bool in_psd(const SymMatrix& s, double tol) {
  if (s.dim() == 0) return true;
  return sym_eig(s).values.front() >= -tol;
}

bool in_nn(const SymMatrix& s, double tol) { return s.min_entry() >= -tol; }

bool is_copositive_2x2(const SymMatrix& s) {
  if (s.dim() != 2) throw DimensionError("is_copositive_2x2 needs dim 2");
  double s11 = s(0, 0), s22 = s(1, 1), s12 = s(0, 1);
  if (s11 < 0.0 || s22 < 0.0) return false;
  return s12 + std::sqrt(s11 * s22) >= 0.0;
}

namespace {

bool simplex_scan(const SymMatrix& s, std::vector<double>& x, int coord, int remaining,
                  int resolution) {
  int n = s.dim();
  if (coord == n - 1) {
    x[coord] = static_cast<double>(remaining) / resolution;
    double q = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q += x[i] * s(i, j) * x[j];
    return q >= -1e-9;
  }
  for (int k = 0; k <= remaining; ++k) {
    x[coord] = static_cast<double>(k) / resolution;
    if (!simplex_scan(s, x, coord + 1, remaining - k, resolution)) return false;
  }
  return true;
}

}  // namespace

bool cop_bruteforce(const SymMatrix& s, int grid_resolution) {
  if (s.dim() > 6) throw DimensionError("cop_bruteforce limited to dim <= 6");
  if (s.dim() == 0) return true;
  if (grid_resolution < 1) throw InvalidInput("grid resolution must be >= 1");
  std::vector<double> x(s.dim(), 0.0);
  return simplex_scan(s, x, 0, grid_resolution, grid_resolution);
}

SplitWitness in_psd_plus_nn(const SymMatrix& s, double tol) {
  SplitWitness out;
  int n = s.dim();
  // Trivial memberships first; the margin program cannot certify boundary
  // cases like S = 0 (no strict interior in the split variables).
  if (in_psd(s, tol)) {
    out.member = true;
    out.psd_part = s;
    out.nn_part = SymMatrix(n);
    return out;
  }
  if (in_nn(s, tol)) {
    out.member = true;
    out.psd_part = SymMatrix(n);
    out.nn_part = s;
    return out;
  }

  ConicProgram prog;
  prog.add_variables(0);
  // S in PSD+NN, slightly relaxed by tol on the PSD factor.
  prog.add_constraint(ConeKind::PSDplusNN, s, Sense::GreaterEq, -tol, "psd_plus_nn");
  SolveResult res = solve(prog);
  if (!res.feasible()) return out;
  out.member = true;
  out.nn_part = res.nn_split[0] ? *res.nn_split[0] : SymMatrix(n);
  out.psd_part = s - out.nn_part;
  return out;
}

}  // namespace posgain
