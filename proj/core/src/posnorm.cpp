#include "posgain/posnorm.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include "posgain/errors.hpp"
#include "posgain/numkernel.hpp"

namespace posgain {

ConicProgram build_gain_lmi(const StateSpace& sys, double gamma, bool with_q,
                            GainLmiLayout* layout) {
  if (!(gamma > 0.0)) throw InvalidInput("build_gain_lmi: gamma must be positive");
  int nx = sys.n(), nw = sys.nw();
  int ld = nx + nw;

  GainLmiLayout lay;
  lay.nx = nx;
  lay.nw = nw;

  ConicProgram prog;
  lay.p_offset = prog.add_variables(sym_dim(nx));
  if (with_q) {
    lay.q1_offset = prog.add_variables(sym_dim(nw));
    lay.q2_offset = prog.add_variables(sym_dim(nw));
  }
  lay.num_vars = prog.num_vars;

  // L(0): [C D]^T [C D] with -gamma^2 added on the w-diagonal.
  Matrix cd = hcat(sys.C, sys.D);
  Matrix f0m = cd.transpose() * cd;
  for (int i = 0; i < nw; ++i) f0m(nx + i, nx + i) -= gamma * gamma;
  SymMatrix f0{f0m};
  double eps = 1e-8 * (1.0 + spectral_norm(f0.to_matrix()));

  ConicConstraint& lmi = prog.add_constraint(ConeKind::PSD, f0, Sense::LessEq, eps, "gain-lmi");
  // Coefficient of P entry (r, c): -E_rc in the state block plus
  // [A B]^T E_rc [A B], which is a symmetrized outer product of rows.
  Matrix ab = hcat(sys.A, sys.B);
  for (int r = 0; r < nx; ++r)
    for (int c = r; c < nx; ++c) {
      Matrix coeff(ld, ld);
      for (int i = 0; i < ld; ++i)
        for (int j = 0; j < ld; ++j)
          coeff(i, j) =
              r == c ? ab(r, i) * ab(r, j) : ab(r, i) * ab(c, j) + ab(c, i) * ab(r, j);
      coeff(r, c) -= 1.0;
      if (r != c) coeff(c, r) -= 1.0;
      lmi.terms.push_back({lay.p_offset + sym_slot(nx, r, c), SymMatrix{coeff}});
    }
  if (with_q) {
    for (int r = 0; r < nw; ++r)
      for (int c = r; c < nw; ++c) {
        SymMatrix coeff(ld);
        coeff.set(nx + r, nx + c, 1.0);
        lmi.terms.push_back({lay.q1_offset + sym_slot(nw, r, c), coeff});
        lmi.terms.push_back({lay.q2_offset + sym_slot(nw, r, c), coeff});
      }
  }

  ConicConstraint& p_psd = prog.add_constraint(ConeKind::PSD, SymMatrix(nx),
                                               Sense::GreaterEq, 0.0, "P-psd");
  for (int r = 0; r < nx; ++r)
    for (int c = r; c < nx; ++c)
      p_psd.terms.push_back({lay.p_offset + sym_slot(nx, r, c), sym_basis(nx, r, c)});

  if (with_q) {
    // Finish each constraint before adding the next: add_constraint can
    // reallocate and invalidate earlier references.
    ConicConstraint& q1_psd = prog.add_constraint(ConeKind::PSD, SymMatrix(nw),
                                                  Sense::GreaterEq, 0.0, "Q1-psd");
    for (int r = 0; r < nw; ++r)
      for (int c = r; c < nw; ++c)
        q1_psd.terms.push_back({lay.q1_offset + sym_slot(nw, r, c), sym_basis(nw, r, c)});
    ConicConstraint& q2_nn = prog.add_constraint(ConeKind::NN, SymMatrix(nw),
                                                 Sense::GreaterEq, 0.0, "Q2-nn");
    for (int r = 0; r < nw; ++r)
      for (int c = r; c < nw; ++c)
        q2_nn.terms.push_back({lay.q2_offset + sym_slot(nw, r, c), sym_basis(nw, r, c)});
  }

  if (layout) *layout = lay;
  return prog;
}

namespace {

struct GammaProbe {
  bool feasible = false;
  GainCertificate cert;
};

GammaProbe probe_gamma(const StateSpace& ss, double gamma, bool with_q, int order) {
  GainLmiLayout lay;
  ConicProgram prog = build_gain_lmi(ss, gamma, with_q, &lay);
  SolveResult res = solve(prog);
  GammaProbe out;
  if (!res.feasible()) return out;  // solver trouble counts as infeasible side
  out.feasible = true;
  out.cert.gamma = gamma;
  out.cert.order = order;
  out.cert.p = unpack_sym(res.x, lay.p_offset, lay.nx);
  if (with_q) {
    out.cert.q1 = unpack_sym(res.x, lay.q1_offset, lay.nw);
    out.cert.q2 = unpack_sym(res.x, lay.q2_offset, lay.nw);
  }
  return out;
}

Matrix blockdiag_copies(const SymMatrix& q, int copies) {
  int d = q.dim();
  Matrix out(d * copies, d * copies);
  for (int k = 0; k < copies; ++k)
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) out(k * d + r, k * d + c) = q(r, c);
  return out;
}

}  // namespace

double hinf_norm(const StateSpace& sys, double tol) {
  SchurResult st = is_schur_stable(sys.A);
  if (!st) throw UnstableSystem("hinf_norm: " + st.diagnostic);
  double lo = spectral_norm(sys.D);
  double hi = std::max(2.0 * lo, 1.0);
  bool bracketed = false;
  for (int i = 0; i < 60 && !bracketed; ++i) {
    if (probe_gamma(sys, hi, false, 1).feasible) {
      bracketed = true;
    } else {
      lo = hi;
      hi *= 2.0;
    }
  }
  if (!bracketed)
    throw SolverFailure("hinf_norm: no feasible gamma up to " + std::to_string(hi));
  while (hi - lo > tol * (1.0 + hi)) {
    double mid = 0.5 * (lo + hi);
    if (probe_gamma(sys, mid, false, 1).feasible)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double upper_bound_pos(const StateSpace& sys, int order, double tol, GainCertificate* cert,
                       const double* bracket_hint) {
  SchurResult st = is_schur_stable(sys.A);
  if (!st) throw UnstableSystem("upper_bound_pos: " + st.diagnostic);
  LiftedSystem lf = lift(sys, order);
  StateSpace lss = lifted_to_statespace(lf);

  double lo = 0.0;
  double hi = 0.0;
  GammaProbe best;
  auto try_gamma = [&](double g) {
    GammaProbe p = probe_gamma(lss, g, true, order);
    if (!p.feasible) return false;
    best = std::move(p);
    return true;
  };

  bool bracketed = false;
  if (bracket_hint && *bracket_hint > 0.0 && try_gamma(*bracket_hint)) {
    hi = *bracket_hint;
    bracketed = true;
  } else {
    hi = std::max(2.0 * spectral_norm(lf.hatD), 1.0);
    if (bracket_hint && *bracket_hint > 0.0) {
      lo = *bracket_hint;
      hi = std::max(hi, 2.0 * *bracket_hint);
    }
    for (int i = 0; i < 60 && !bracketed; ++i) {
      if (try_gamma(hi)) {
        bracketed = true;
      } else {
        lo = hi;
        hi *= 2.0;
      }
    }
  }
  if (!bracketed)
    throw SolverFailure("upper_bound_pos: no feasible gamma up to " + std::to_string(hi));

  while (hi - lo > tol * (1.0 + hi)) {
    double mid = 0.5 * (lo + hi);
    if (try_gamma(mid))
      hi = mid;
    else
      lo = mid;
  }
  if (cert) *cert = best.cert;
  return hi;
}

double lower_bound_pos(const StateSpace& sys, int order, double tol,
                       LowerBoundWitness* witness) {
  LiftedSystem lf = lift(sys, order);
  int m = lf.hatD.cols();
  Matrix gram = lf.hatD.transpose() * lf.hatD;

  // maximize trace(gram Z) over trace-one DNN Z, with the (m-1, m-1) entry
  // eliminated through the trace constraint.
  ConicProgram prog;
  const int nv = sym_dim(m) - 1;
  prog.add_variables(nv);
  SymMatrix f0(m);
  f0.set(m - 1, m - 1, 1.0);
  ConicConstraint& dnn = prog.add_constraint(ConeKind::DNN, f0, Sense::GreaterEq, 0.0, "Z-dnn");
  int slot = 0;
  for (int r = 0; r < m; ++r)
    for (int c = r; c < m; ++c) {
      if (r == m - 1 && c == m - 1) continue;
      SymMatrix coeff = sym_basis(m, r, c);
      double obj = 2.0 * gram(r, c);
      if (r == c) {
        coeff.add(m - 1, m - 1, -1.0);
        obj = gram(r, r) - gram(m - 1, m - 1);
      }
      prog.objective[slot] = -obj;  // solver minimizes
      dnn.terms.push_back({slot, std::move(coeff)});
      ++slot;
    }

  double trace_opt = gram(m - 1, m - 1);
  SymMatrix z_star = f0;
  if (nv > 0) {
    SolveResult res = solve(prog);
    if (res.status != SolveStatus::Optimal)
      throw SolverFailure("lower_bound_pos: relaxation solve failed (" + res.message + ")");
    trace_opt = gram(m - 1, m - 1) - res.objective;
    if (res.duality_gap > tol * (1.0 + std::fabs(trace_opt)))
      throw SolverFailure("lower_bound_pos: relaxation gap above tolerance");
    z_star = res.witnesses[0];
  }

  PerronResult pr = perron_vector(z_star, false);
  std::vector<double> v = pr.v;
  std::vector<double> dv = mat_vec(lf.hatD, v);
  double value = vec_norm(dv);
  // Canonical basis vectors are admissible inputs too; keep the best.
  for (int j = 0; j < m; ++j) {
    double col = 0.0;
    for (int i = 0; i < lf.hatD.rows(); ++i) col += lf.hatD(i, j) * lf.hatD(i, j);
    col = std::sqrt(col);
    if (col > value) {
      value = col;
      v.assign(m, 0.0);
      v[j] = 1.0;
    }
  }

  if (witness) {
    witness->order = order;
    witness->z_star = z_star;
    witness->v_star = v;
    witness->value = value;
    witness->sdp_value = std::sqrt(std::max(0.0, trace_opt));
    if (m == 1) {
      witness->rank_one_exact = true;
    } else {
      EigResult eig = sym_eig(z_star);
      double l1 = eig.values[m - 1], l2 = eig.values[m - 2];
      witness->rank_one_exact = l1 > 0.0 && std::max(0.0, l2) / l1 <= 1e-6;
    }
  }
  return value;
}

double pos_matnorm_exact_small(const Matrix& m, double tol) {
  if (m.cols() > 4)
    throw ColumnCountExceeded("pos_matnorm_exact_small: needs <= 4 columns, got " +
                              std::to_string(m.cols()));
  if (m.cols() == 0) return 0.0;
  int n = m.cols();
  SymMatrix gram{m.transpose() * m};
  double hi = spectral_norm(m);
  if (hi == 0.0) return 0.0;
  double lo = 0.0;
  while (hi - lo > tol * (1.0 + hi)) {
    double mid = 0.5 * (lo + hi);
    SymMatrix s = SymMatrix::identity(n).scaled(mid * mid) - gram;
    if (in_psd_plus_nn(s, 1e-9))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double pos_matnorm_bruteforce(const Matrix& m, int samples, unsigned seed) {
  if (m.cols() > 20)
    throw ColumnCountExceeded("pos_matnorm_bruteforce: needs <= 20 columns, got " +
                              std::to_string(m.cols()));
  int n = m.cols();
  if (n == 0) return 0.0;

  auto evaluate = [&](const std::vector<double>& v) {
    double norm = vec_norm(v);
    if (norm <= 0.0) return 0.0;
    std::vector<double> unit(v);
    for (double& x : unit) x /= norm;
    return vec_norm(mat_vec(m, unit));
  };

  double best = 0.0;
  std::vector<double> v(n, 0.0);
  for (int j = 0; j < n; ++j) {
    v.assign(n, 0.0);
    v[j] = 1.0;
    best = std::max(best, evaluate(v));
  }

  // Clamped top right singular vector, both sign choices.
  SymMatrix gram{m.transpose() * m};
  EigResult eig = sym_eig(gram);
  for (int sign = -1; sign <= 1; sign += 2) {
    for (int i = 0; i < n; ++i) v[i] = std::max(0.0, sign * eig.vectors(i, n - 1));
    best = std::max(best, evaluate(v));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) v[i] = std::fabs(gauss(rng));
    best = std::max(best, evaluate(v));
  }
  return best;
}

CertCheck verify_certificate(const StateSpace& sys, const GainCertificate& cert,
                             double tol) {
  CertCheck out;
  if (!(cert.gamma > 0.0)) {
    out.violated = "gamma must be positive";
    return out;
  }
  if (cert.order < 1) {
    out.violated = "lifting order must be >= 1";
    return out;
  }
  if (cert.p.dim() != sys.n()) {
    out.violated = "P dimension mismatch";
    return out;
  }
  LiftedSystem lf = lift(sys, cert.order);
  int nw = lf.hatB.cols();
  SymMatrix q1 = cert.q1.dim() > 0 ? cert.q1 : SymMatrix(nw);
  SymMatrix q2 = cert.q2.dim() > 0 ? cert.q2 : SymMatrix(nw);
  if (q1.dim() != nw || q2.dim() != nw) {
    out.violated = "Q dimension mismatch";
    return out;
  }
  if (!in_psd(cert.p, tol)) {
    out.violated = "P not positive semidefinite";
    return out;
  }
  if (!in_psd(q1, tol)) {
    out.violated = "Q1 not positive semidefinite";
    return out;
  }
  if (!in_nn(q2, tol)) {
    out.violated = "Q2 not entrywise nonnegative";
    return out;
  }

  // L = blockdiag(-P, -gamma^2 I + Q) + [A B; C D]^T blockdiag(P, I) [A B; C D]
  int nx = sys.n();
  int ld = nx + nw;
  Matrix msys = vcat(hcat(lf.hatA, lf.hatB), hcat(lf.hatC, lf.hatD));
  Matrix pi(nx + lf.hatC.rows(), nx + lf.hatC.rows());
  pi.set_block(0, 0, cert.p.to_matrix());
  for (int i = 0; i < lf.hatC.rows(); ++i) pi(nx + i, nx + i) = 1.0;
  Matrix l = msys.transpose() * pi * msys;
  Matrix head = cert.p.to_matrix().scaled(-1.0);
  Matrix tail = (q1 + q2).to_matrix();
  for (int i = 0; i < nw; ++i) tail(i, i) -= cert.gamma * cert.gamma;
  Matrix shift(ld, ld);
  shift.set_block(0, 0, head);
  shift.set_block(nx, nx, tail);
  l = l + shift;

  double lmax = sym_eig(SymMatrix{l}).values.back();
  if (lmax > 0.0) {
    out.violated = "LMI not negative semidefinite (lambda_max = " + std::to_string(lmax) + ")";
    return out;
  }
  out.ok = true;
  return out;
}

CertCheck theorem2_composition_check(const StateSpace& sys, int order, int p,
                                     const GainCertificate& cert) {
  CertCheck out;
  if (p < 1) {
    out.violated = "composition factor must be >= 1";
    return out;
  }
  if (cert.order != order) {
    out.violated = "certificate order mismatch";
    return out;
  }
  if (p == 1) return verify_certificate(sys, cert);
  GainCertificate composed;
  composed.gamma = cert.gamma;
  composed.order = order * p;
  composed.p = cert.p;
  if (cert.q1.dim() > 0) composed.q1 = SymMatrix{blockdiag_copies(cert.q1, p)};
  if (cert.q2.dim() > 0) composed.q2 = SymMatrix{blockdiag_copies(cert.q2, p)};
  return verify_certificate(sys, composed);
}

BoundReport bound_sweep(const StateSpace& sys, int max_order, double tol) {
  if (max_order < 1) throw InvalidOrder("bound_sweep: max_order must be >= 1");
  SchurResult st = is_schur_stable(sys.A);
  if (!st) throw UnstableSystem("bound_sweep: " + st.diagnostic);

  BoundReport rep;
  rep.hinf = hinf_norm(sys, tol);
  rep.rows.resize(max_order);
  for (int n = 1; n <= max_order; ++n) rep.rows[n - 1].order = n;

  std::vector<std::future<double>> lowers;
  lowers.reserve(max_order);
  for (int n = 1; n <= max_order; ++n)
    lowers.push_back(std::async(std::launch::async,
                                [&sys, n, tol] { return lower_bound_pos(sys, n, tol); }));

  std::optional<double> hint;
  for (int n = 1; n <= max_order; ++n) {
    try {
      double u = upper_bound_pos(sys, n, tol, nullptr, hint ? &*hint : nullptr);
      rep.rows[n - 1].upper = u;
      hint = u;
    } catch (const Error& e) {
      rep.warnings.push_back("order " + std::to_string(n) + " upper bound: " + e.what());
    }
  }
  for (int n = 1; n <= max_order; ++n) {
    try {
      rep.rows[n - 1].lower = lowers[n - 1].get();
    } catch (const Error& e) {
      rep.warnings.push_back("order " + std::to_string(n) + " lower bound: " + e.what());
    }
  }

  for (const BoundRow& row : rep.rows) {
    if (row.upper && (!rep.best_upper || *row.upper < *rep.best_upper))
      rep.best_upper = row.upper;
    if (row.lower && (!rep.best_lower || *row.lower > *rep.best_lower))
      rep.best_lower = row.lower;
  }
  return rep;
}

}  // namespace posgain
