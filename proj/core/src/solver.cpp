// Dense block-structured primal-dual interior-point solver (HKM direction,
// Mehrotra predictor-corrector) for the inequality-form programs built by
// the other modules:
//
//   minimize c.x  subject to  F0_j + sum_i x_i F_i,j  in cone_j
//
// after expansion to the two primitive cones (PSD blocks, entrywise
// nonnegative blocks). The inequality form is the dual side of the usual
// SDP standard form with C = G0, A_i = -G_i, b = -c, so the solver iterates
// (X, y, S) with y the decision vector and S the constraint slack.
//
// Feasibility queries (zero objective) run a margin program
//   minimize t  subject to  G_j(x) + t I >= 0,  t >= -1
// and classify by the sign of t* (threshold 1e-7). The -1 floor keeps the
// program bounded for strictly feasible inputs, where scale-homogeneous
// LMIs would otherwise drive t to -infinity. Strictly feasible iterates
// exit early through an explicit per-block Cholesky check of the candidate.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "posgain/cones.hpp"
#include "posgain/errors.hpp"
#include "posgain/numkernel.hpp"

namespace posgain {

namespace {

bool ipm_debug() {
  static const bool on = std::getenv("POSGAIN_IPM_DEBUG") != nullptr;
  return on;
}

struct Entry {
  int r, c;  // r <= c
  double v;
};

struct LpEntry {
  int idx;
  double v;
};

// One primitive block of the expanded program, oriented so the constraint
// reads G0 + sum x_i G_i in cone (PSD or entrywise nonnegative).
struct PrimBlock {
  bool sdp;
  int dim;  // matrix dimension of the map
  SymMatrix g0;
  std::vector<std::pair<int, SymMatrix>> terms;
};

struct Expanded {
  int nvar = 0;
  std::vector<double> c;
  std::vector<PrimBlock> blocks;
  std::vector<int> aux_offset;  // per original constraint; -1 if none
};

SymMatrix oriented_f0(const ConicConstraint& con, bool subtract_margin_identity) {
  double s = con.sense == Sense::GreaterEq ? 1.0 : -1.0;
  SymMatrix g = con.f0.scaled(s);
  if (subtract_margin_identity && con.margin != 0.0)
    g = g - SymMatrix::identity(g.dim()).scaled(con.margin);
  return g;
}

Expanded expand(const ConicProgram& prog) {
  Expanded e;
  e.nvar = prog.num_vars;
  e.c.assign(prog.num_vars, 0.0);
  for (size_t i = 0; i < prog.objective.size() && i < e.c.size(); ++i)
    e.c[i] = prog.objective[i];
  e.aux_offset.assign(prog.constraints.size(), -1);

  for (size_t ci = 0; ci < prog.constraints.size(); ++ci) {
    const ConicConstraint& con = prog.constraints[ci];
    double s = con.sense == Sense::GreaterEq ? 1.0 : -1.0;
    int d = con.dim();
    for (const AffineTerm& t : con.terms) {
      if (t.coeff.dim() != d) throw DimensionError("constraint term dimension mismatch");
      if (t.var < 0 || t.var >= prog.num_vars) throw InvalidInput("constraint term variable out of range");
    }
    switch (con.cone) {
      case ConeKind::PSD:
      case ConeKind::NN: {
        PrimBlock b;
        b.sdp = con.cone == ConeKind::PSD;
        b.dim = d;
        b.g0 = oriented_f0(con, true);
        for (const AffineTerm& t : con.terms) b.terms.emplace_back(t.var, t.coeff.scaled(s));
        e.blocks.push_back(std::move(b));
        break;
      }
      case ConeKind::PSDplusNN: {
        if (con.sense != Sense::GreaterEq)
          throw InvalidInput("PSDplusNN constraints must be GreaterEq");
        int aux = e.nvar;
        e.aux_offset[ci] = aux;
        e.nvar += sym_dim(d);
        e.c.resize(e.nvar, 0.0);
        // F(x) - Nn - margin*I in PSD
        PrimBlock bp;
        bp.sdp = true;
        bp.dim = d;
        bp.g0 = oriented_f0(con, true);
        for (const AffineTerm& t : con.terms) bp.terms.emplace_back(t.var, t.coeff);
        for (int r = 0; r < d; ++r)
          for (int c = r; c < d; ++c) {
            SymMatrix basis(d);
            basis.set(r, c, -1.0);
            bp.terms.emplace_back(aux + sym_slot(d, r, c), std::move(basis));
          }
        e.blocks.push_back(std::move(bp));
        // Nn entrywise nonnegative
        PrimBlock bn;
        bn.sdp = false;
        bn.dim = d;
        bn.g0 = SymMatrix(d);
        for (int r = 0; r < d; ++r)
          for (int c = r; c < d; ++c) {
            SymMatrix basis(d);
            basis.set(r, c, 1.0);
            bn.terms.emplace_back(aux + sym_slot(d, r, c), std::move(basis));
          }
        e.blocks.push_back(std::move(bn));
        break;
      }
      case ConeKind::DNN: {
        for (int pass = 0; pass < 2; ++pass) {
          PrimBlock b;
          b.sdp = pass == 0;
          b.dim = d;
          b.g0 = oriented_f0(con, true);
          for (const AffineTerm& t : con.terms) b.terms.emplace_back(t.var, t.coeff.scaled(s));
          e.blocks.push_back(std::move(b));
        }
        break;
      }
      case ConeKind::COP:
        throw UnsupportedCone(
            "COP constraints are not solvable; use the PSDplusNN relaxation");
    }
  }
  return e;
}

// ------- compiled standard form -------

struct SBlock {
  bool sdp;
  int d;       // matrix dim (sdp) or entry count (lp)
  Matrix C;    // sdp constant
  std::vector<double> Clp;
  std::vector<int> vars;
  std::vector<std::vector<Entry>> ent;
  std::vector<std::vector<LpEntry>> lpent;
  std::vector<std::vector<std::pair<int, double>>> bycol;  // lp: per entry idx -> (slot, v)
};

struct StdProblem {
  int m = 0;
  std::vector<double> b;
  std::vector<SBlock> blocks;
  double normC = 1.0, normA = 1.0, normb = 1.0;
  int kdim = 0;
};

StdProblem compile(const Expanded& e) {
  StdProblem p;
  p.m = e.nvar;
  p.b.assign(e.nvar, 0.0);
  for (int i = 0; i < e.nvar; ++i) p.b[i] = -e.c[i];

  for (const PrimBlock& pb : e.blocks) {
    SBlock sb;
    sb.sdp = pb.sdp;
    if (pb.sdp) {
      sb.d = pb.dim;
      sb.C = pb.g0.to_matrix();
      std::vector<std::pair<int, const SymMatrix*>> sorted;
      for (const auto& [var, coeff] : pb.terms) sorted.emplace_back(var, &coeff);
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [var, coeff] : sorted) {
        std::vector<Entry> ent;
        for (int r = 0; r < pb.dim; ++r)
          for (int c = r; c < pb.dim; ++c) {
            double v = -(*coeff)(r, c);  // A_i = -G_i
            if (v != 0.0) ent.push_back({r, c, v});
          }
        if (ent.empty()) continue;
        sb.vars.push_back(var);
        sb.ent.push_back(std::move(ent));
      }
    } else {
      int d = pb.dim;
      sb.d = sym_dim(d);
      sb.Clp.resize(sb.d);
      for (int r = 0; r < d; ++r)
        for (int c = r; c < d; ++c) sb.Clp[sym_slot(d, r, c)] = pb.g0(r, c);
      std::vector<std::pair<int, const SymMatrix*>> sorted;
      for (const auto& [var, coeff] : pb.terms) sorted.emplace_back(var, &coeff);
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      sb.bycol.resize(sb.d);
      for (const auto& [var, coeff] : sorted) {
        std::vector<LpEntry> ent;
        for (int r = 0; r < d; ++r)
          for (int c = r; c < d; ++c) {
            double v = -(*coeff)(r, c);
            if (v != 0.0) ent.push_back({sym_slot(d, r, c), v});
          }
        if (ent.empty()) continue;
        int slot = static_cast<int>(sb.vars.size());
        sb.vars.push_back(var);
        for (const LpEntry& le : ent) sb.bycol[le.idx].emplace_back(slot, le.v);
        sb.lpent.push_back(std::move(ent));
      }
    }
    p.blocks.push_back(std::move(sb));
  }

  for (const SBlock& sb : p.blocks) {
    p.kdim += sb.d;
    if (sb.sdp) {
      p.normC = std::max(p.normC, sb.C.max_abs());
      for (const auto& es : sb.ent)
        for (const Entry& en : es) p.normA = std::max(p.normA, std::fabs(en.v));
    } else {
      for (double v : sb.Clp) p.normC = std::max(p.normC, std::fabs(v));
      for (const auto& es : sb.lpent)
        for (const LpEntry& en : es) p.normA = std::max(p.normA, std::fabs(en.v));
    }
  }
  for (double v : p.b) p.normb = std::max(p.normb, std::fabs(v));
  return p;
}

// ------- small dense helpers -------

// Lower-triangular inverse of a Cholesky factor.
Matrix tri_inverse(const Matrix& l) {
  int n = l.rows();
  Matrix inv(n, n);
  for (int c = 0; c < n; ++c) {
    inv(c, c) = 1.0 / l(c, c);
    for (int r = c + 1; r < n; ++r) {
      double s = 0.0;
      for (int k = c; k < r; ++k) s += l(r, k) * inv(k, c);
      inv(r, c) = -s / l(r, r);
    }
  }
  return inv;
}

bool chol_inplace(std::vector<double>& a, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[static_cast<size_t>(j) * n + j];
    for (int k = 0; k < j; ++k) {
      double v = a[static_cast<size_t>(j) * n + k];
      d -= v * v;
    }
    if (d <= 0.0 || !std::isfinite(d)) return false;
    double ljj = std::sqrt(d);
    a[static_cast<size_t>(j) * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double v = a[static_cast<size_t>(i) * n + j];
      for (int k = 0; k < j; ++k)
        v -= a[static_cast<size_t>(i) * n + k] * a[static_cast<size_t>(j) * n + k];
      a[static_cast<size_t>(i) * n + j] = v / ljj;
    }
  }
  return true;
}

void chol_solve(const std::vector<double>& l, int n, std::vector<double>& rhs) {
  for (int i = 0; i < n; ++i) {
    double s = rhs[i];
    for (int k = 0; k < i; ++k) s -= l[static_cast<size_t>(i) * n + k] * rhs[k];
    rhs[i] = s / l[static_cast<size_t>(i) * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int k = i + 1; k < n; ++k) s -= l[static_cast<size_t>(k) * n + i] * rhs[k];
    rhs[i] = s / l[static_cast<size_t>(i) * n + i];
  }
}

struct IterBlocks {
  std::vector<Matrix> X, S;
  std::vector<std::vector<double>> xl, sl;
};

double inner_C_X(const StdProblem& p, const IterBlocks& it) {
  double s = 0.0;
  for (size_t k = 0; k < p.blocks.size(); ++k) {
    if (p.blocks[k].sdp) {
      const auto& c = p.blocks[k].C.data();
      const auto& x = it.X[k].data();
      for (size_t i = 0; i < c.size(); ++i) s += c[i] * x[i];
    } else {
      for (int i = 0; i < p.blocks[k].d; ++i) s += p.blocks[k].Clp[i] * it.xl[k][i];
    }
  }
  return s;
}

// <A_i, T> for a dense, possibly nonsymmetric T.
double inner_row_sdp(const std::vector<Entry>& ent, const Matrix& t) {
  double s = 0.0;
  for (const Entry& e : ent)
    s += e.r == e.c ? e.v * t(e.r, e.r) : e.v * (t(e.r, e.c) + t(e.c, e.r));
  return s;
}

void apply_A(const StdProblem& p, const std::vector<Matrix>& xs,
             const std::vector<std::vector<double>>& xl, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (size_t k = 0; k < p.blocks.size(); ++k) {
    const SBlock& sb = p.blocks[k];
    if (sb.sdp) {
      const Matrix& x = xs[k];
      for (size_t j = 0; j < sb.vars.size(); ++j) {
        out[sb.vars[j]] += inner_row_sdp(sb.ent[j], x);
      }
    } else {
      const std::vector<double>& x = xl[k];
      for (size_t j = 0; j < sb.vars.size(); ++j) {
        double acc = 0.0;
        for (const LpEntry& e : sb.lpent[j]) acc += e.v * x[e.idx];
        out[sb.vars[j]] += acc;
      }
    }
  }
}

void apply_AT_block(const SBlock& sb, const std::vector<double>& y, Matrix& out_sdp,
                    std::vector<double>& out_lp) {
  if (sb.sdp) {
    out_sdp = Matrix(sb.d, sb.d);
    for (size_t j = 0; j < sb.vars.size(); ++j) {
      double yj = y[sb.vars[j]];
      if (yj == 0.0) continue;
      for (const Entry& e : sb.ent[j]) {
        out_sdp(e.r, e.c) += yj * e.v;
        if (e.r != e.c) out_sdp(e.c, e.r) += yj * e.v;
      }
    }
  } else {
    out_lp.assign(sb.d, 0.0);
    for (size_t j = 0; j < sb.vars.size(); ++j) {
      double yj = y[sb.vars[j]];
      if (yj == 0.0) continue;
      for (const LpEntry& e : sb.lpent[j]) out_lp[e.idx] += yj * e.v;
    }
  }
}

double max_step_sdp(const Matrix& x, const Matrix& dx) {
  SymMatrix xs{x};
  auto l = cholesky(xs);
  if (!l) {
    SymMatrix nudged = xs + SymMatrix::identity(x.rows()).scaled(1e-12 * (1.0 + xs.max_abs()));
    l = cholesky(nudged);
    if (!l) return 0.0;
  }
  Matrix li = tri_inverse(*l);
  Matrix w = li * dx * li.transpose();
  double lam = sym_eig(SymMatrix(w)).values.front();
  if (lam >= -1e-14) return std::numeric_limits<double>::infinity();
  return -1.0 / lam;
}

double max_step_lp(const std::vector<double>& x, const std::vector<double>& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < x.size(); ++i)
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  return a;
}

struct IpmOutcome {
  enum Kind { Converged, Accepted, Stalled, MaxIter, NumFail, EarlyFeasible } kind = NumFail;
  std::vector<double> y;
  double pobj = 0.0, dobj = 0.0;
  double measure = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// Returns true when x strictly satisfies every block of the expanded
// program (Cholesky for PSD maps, nonnegativity for entrywise maps).
bool explicit_feasible(const Expanded& e, const std::vector<double>& x) {
  for (const PrimBlock& pb : e.blocks) {
    SymMatrix g = pb.g0;
    for (const auto& [var, coeff] : pb.terms) {
      double xv = x[var];
      if (xv != 0.0) g = g + coeff.scaled(xv);
    }
    if (pb.sdp) {
      if (!cholesky(g)) return false;
    } else {
      if (g.min_entry() < 0.0) return false;
    }
  }
  return true;
}

IpmOutcome run_ipm(const StdProblem& p, const SolveOptions& opts, const Expanded* early_check,
                   int early_nvar) {
  IpmOutcome out;
  int m = p.m;
  int nblk = static_cast<int>(p.blocks.size());
  double kdim = std::max(1, p.kdim);

  double xi = std::max({10.0, std::sqrt(kdim), kdim * p.normb / p.normA});
  double eta = std::max({10.0, std::sqrt(kdim), p.normC, p.normA});

  IterBlocks it;
  it.X.resize(nblk);
  it.S.resize(nblk);
  it.xl.resize(nblk);
  it.sl.resize(nblk);
  for (int k = 0; k < nblk; ++k) {
    if (p.blocks[k].sdp) {
      it.X[k] = Matrix::identity(p.blocks[k].d).scaled(xi);
      it.S[k] = Matrix::identity(p.blocks[k].d).scaled(eta);
    } else {
      it.xl[k].assign(p.blocks[k].d, xi);
      it.sl[k].assign(p.blocks[k].d, eta);
    }
  }
  std::vector<double> y(m, 0.0);

  std::vector<double> best_y;
  double best_measure = std::numeric_limits<double>::infinity();
  double best_pobj = 0.0, best_dobj = 0.0;
  int stall = 0;

  std::vector<double> ax(m), rp(m);
  std::vector<Matrix> rd(nblk), sinv(nblk);
  std::vector<std::vector<double>> rdl(nblk), sinvl(nblk);

  auto finish = [&](IpmOutcome::Kind kind, int iters) {
    out.kind = kind;
    if (!best_y.empty()) {
      if (best_measure <= opts.accept_tol && kind != IpmOutcome::Converged &&
          kind != IpmOutcome::EarlyFeasible)
        out.kind = IpmOutcome::Accepted;
      out.y = best_y;
      out.pobj = best_pobj;
      out.dobj = best_dobj;
      out.measure = best_measure;
    } else {
      out.y = y;
    }
    out.iterations = iters;
    return out;
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    apply_A(p, it.X, it.xl, ax);
    for (int i = 0; i < m; ++i) rp[i] = p.b[i] - ax[i];
    double rd_norm2 = 0.0;
    for (int k = 0; k < nblk; ++k) {
      if (p.blocks[k].sdp) {
        Matrix aty;
        std::vector<double> unused;
        apply_AT_block(p.blocks[k], y, aty, unused);
        rd[k] = p.blocks[k].C - it.S[k] - aty;
        for (double v : rd[k].data()) rd_norm2 += v * v;
      } else {
        Matrix unused;
        apply_AT_block(p.blocks[k], y, unused, rdl[k]);
        for (int i = 0; i < p.blocks[k].d; ++i) {
          rdl[k][i] = p.blocks[k].Clp[i] - it.sl[k][i] - rdl[k][i];
          rd_norm2 += rdl[k][i] * rdl[k][i];
        }
      }
    }

    double mu = 0.0;
    for (int k = 0; k < nblk; ++k) {
      if (p.blocks[k].sdp) {
        const auto& a = it.X[k].data();
        const auto& b2 = it.S[k].data();
        for (size_t i = 0; i < a.size(); ++i) mu += a[i] * b2[i];
      } else {
        for (int i = 0; i < p.blocks[k].d; ++i) mu += it.xl[k][i] * it.sl[k][i];
      }
    }
    mu /= kdim;

    double pobj = inner_C_X(p, it);
    double dobj = 0.0;
    for (int i = 0; i < m; ++i) dobj += p.b[i] * y[i];
    double gap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj) + std::fabs(dobj));
    double rp_norm = vec_norm(rp) / (1.0 + p.normb);
    double rd_rel = std::sqrt(rd_norm2) / (1.0 + p.normC);
    double measure = std::max({gap, rp_norm, rd_rel});

    if (ipm_debug())
      std::fprintf(stderr, "[ipm] it=%3d mu=%9.3e gap=%9.3e rp=%9.3e rd=%9.3e pobj=%+.8e stall=%d\n",
                   iter, mu, gap, rp_norm, rd_rel, pobj, stall);

    if (measure < best_measure) {
      best_measure = measure;
      best_y = y;
      best_pobj = pobj;
      best_dobj = dobj;
      stall = 0;
    } else {
      ++stall;
    }

    if (early_check && iter >= 1) {
      std::vector<double> cand(y.begin(), y.begin() + early_nvar);
      if (explicit_feasible(*early_check, cand)) {
        out.y = y;
        out.pobj = pobj;
        out.dobj = dobj;
        out.measure = measure;
        out.iterations = iter;
        out.kind = IpmOutcome::EarlyFeasible;
        return out;
      }
    }

    if (gap < opts.opt_tol && rp_norm < opts.opt_tol && rd_rel < opts.opt_tol) {
      out.kind = IpmOutcome::Converged;
      out.y = y;
      out.pobj = pobj;
      out.dobj = dobj;
      out.measure = measure;
      out.iterations = iter;
      return out;
    }
    if (stall >= 6 || (mu < 1e-13 * (1.0 + std::fabs(pobj)) && stall >= 2))
      return finish(IpmOutcome::Stalled, iter);

    // Factor the slack blocks.
    bool ok = true;
    for (int k = 0; k < nblk && ok; ++k) {
      if (p.blocks[k].sdp) {
        auto l = cholesky(SymMatrix(it.S[k]));
        if (!l) {
          ok = false;
          break;
        }
        Matrix li = tri_inverse(*l);
        sinv[k] = li.transpose() * li;
      } else {
        sinvl[k].resize(p.blocks[k].d);
        for (int i = 0; i < p.blocks[k].d; ++i) {
          if (it.sl[k][i] <= 0.0) {
            ok = false;
            break;
          }
          sinvl[k][i] = 1.0 / it.sl[k][i];
        }
      }
    }
    if (!ok) return finish(IpmOutcome::NumFail, iter);

    // Schur complement M_ij = <A_i, Sinv A_j X>.
    std::vector<double> schur(static_cast<size_t>(m) * m, 0.0);
    for (int k = 0; k < nblk; ++k) {
      const SBlock& sb = p.blocks[k];
      if (sb.sdp) {
        int d = sb.d;
        const Matrix& si = sinv[k];
        const Matrix& x = it.X[k];
        Matrix t(d, d);
        for (size_t j = 0; j < sb.vars.size(); ++j) {
          std::fill(t.data().begin(), t.data().end(), 0.0);
          for (const Entry& e : sb.ent[j]) {
            // v * (Sinv e_r e_c^T X + [r!=c] Sinv e_c e_r^T X)
            for (int a = 0; a < d; ++a) {
              double f = e.v * si(a, e.r);
              if (f != 0.0) {
                const double* xrow = &x.data()[static_cast<size_t>(e.c) * d];
                double* trow = &t.data()[static_cast<size_t>(a) * d];
                for (int b2 = 0; b2 < d; ++b2) trow[b2] += f * xrow[b2];
              }
            }
            if (e.r != e.c) {
              for (int a = 0; a < d; ++a) {
                double f = e.v * si(a, e.c);
                if (f != 0.0) {
                  const double* xrow = &x.data()[static_cast<size_t>(e.r) * d];
                  double* trow = &t.data()[static_cast<size_t>(a) * d];
                  for (int b2 = 0; b2 < d; ++b2) trow[b2] += f * xrow[b2];
                }
              }
            }
          }
          for (size_t i = 0; i <= j; ++i) {
            double v = inner_row_sdp(sb.ent[i], t);
            int vi = sb.vars[i], vj = sb.vars[j];
            if (vi > vj) std::swap(vi, vj);
            schur[static_cast<size_t>(vi) * m + vj] += v;
          }
        }
      } else {
        for (int idx = 0; idx < sb.d; ++idx) {
          const auto& col = sb.bycol[idx];
          if (col.empty()) continue;
          double w = it.xl[k][idx] * sinvl[k][idx];
          for (size_t a = 0; a < col.size(); ++a)
            for (size_t b2 = a; b2 < col.size(); ++b2) {
              int vi = sb.vars[col[a].first], vj = sb.vars[col[b2].first];
              if (vi > vj) std::swap(vi, vj);
              schur[static_cast<size_t>(vi) * m + vj] += col[a].second * col[b2].second * w;
            }
        }
      }
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < i; ++j)
        schur[static_cast<size_t>(i) * m + j] = schur[static_cast<size_t>(j) * m + i];

    double trace_m = 0.0;
    for (int i = 0; i < m; ++i) trace_m += schur[static_cast<size_t>(i) * m + i];
    double ridge = 1e-13 * (1.0 + trace_m / m);
    std::vector<double> mfac;
    bool factored = false;
    for (int attempt = 0; attempt < 8 && !factored; ++attempt) {
      mfac = schur;
      for (int i = 0; i < m; ++i) mfac[static_cast<size_t>(i) * m + i] += ridge;
      factored = chol_inplace(mfac, m);
      if (!factored) ridge *= 100.0;
    }
    if (!factored) return finish(IpmOutcome::NumFail, iter);

    // Common right-hand-side pieces.
    std::vector<double> a_sinv(m), a_rx(m);
    {
      std::vector<Matrix> tmp(nblk);
      std::vector<std::vector<double>> tmpl(nblk);
      for (int k = 0; k < nblk; ++k) {
        if (p.blocks[k].sdp) {
          tmp[k] = sinv[k];
        } else {
          tmpl[k] = sinvl[k];
        }
      }
      apply_A(p, tmp, tmpl, a_sinv);
      for (int k = 0; k < nblk; ++k) {
        if (p.blocks[k].sdp) {
          tmp[k] = sinv[k] * rd[k] * it.X[k];
        } else {
          tmpl[k].resize(p.blocks[k].d);
          for (int i = 0; i < p.blocks[k].d; ++i)
            tmpl[k][i] = sinvl[k][i] * rdl[k][i] * it.xl[k][i];
        }
      }
      apply_A(p, tmp, tmpl, a_rx);
    }

    auto newton = [&](double sigma_mu, const std::vector<Matrix>* corr,
                      const std::vector<std::vector<double>>* corrl, std::vector<double>& dy,
                      std::vector<Matrix>& dS, std::vector<std::vector<double>>& dSl,
                      std::vector<Matrix>& dX, std::vector<std::vector<double>>& dXl) {
      std::vector<double> rhs(m);
      for (int i = 0; i < m; ++i) rhs[i] = p.b[i] - sigma_mu * a_sinv[i] + a_rx[i];
      if (corr) {
        std::vector<double> ac(m);
        apply_A(p, *corr, *corrl, ac);
        for (int i = 0; i < m; ++i) rhs[i] += ac[i];
      }
      dy = rhs;
      chol_solve(mfac, m, dy);
      dS.assign(nblk, Matrix());
      dSl.assign(nblk, {});
      dX.assign(nblk, Matrix());
      dXl.assign(nblk, {});
      for (int k = 0; k < nblk; ++k) {
        if (p.blocks[k].sdp) {
          Matrix aty;
          std::vector<double> unused;
          apply_AT_block(p.blocks[k], dy, aty, unused);
          dS[k] = rd[k] - aty;
          Matrix t = sinv[k] * dS[k] * it.X[k];
          if (corr) t = t + (*corr)[k];
          int d = p.blocks[k].d;
          Matrix dx(d, d);
          for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
              dx(r, c) = sigma_mu * sinv[k](r, c) - it.X[k](r, c) - 0.5 * (t(r, c) + t(c, r));
          dX[k] = std::move(dx);
        } else {
          Matrix unused;
          apply_AT_block(p.blocks[k], dy, unused, dSl[k]);
          int d = p.blocks[k].d;
          dXl[k].resize(d);
          for (int i = 0; i < d; ++i) {
            dSl[k][i] = rdl[k][i] - dSl[k][i];
            double t = sinvl[k][i] * dSl[k][i] * it.xl[k][i];
            if (corrl) t += (*corrl)[k][i];
            dXl[k][i] = sigma_mu * sinvl[k][i] - it.xl[k][i] - t;
          }
        }
      }
    };

    auto step_bounds = [&](const std::vector<Matrix>& dX,
                           const std::vector<std::vector<double>>& dXl,
                           const std::vector<Matrix>& dS,
                           const std::vector<std::vector<double>>& dSl, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nblk; ++k) {
        if (p.blocks[k].sdp) {
          ap = std::min(ap, max_step_sdp(it.X[k], dX[k]));
          ad = std::min(ad, max_step_sdp(it.S[k], dS[k]));
        } else {
          ap = std::min(ap, max_step_lp(it.xl[k], dXl[k]));
          ad = std::min(ad, max_step_lp(it.sl[k], dSl[k]));
        }
      }
    };

    // Predictor (affine scaling).
    std::vector<double> dy_a;
    std::vector<Matrix> dS_a, dX_a;
    std::vector<std::vector<double>> dSl_a, dXl_a;
    newton(0.0, nullptr, nullptr, dy_a, dS_a, dSl_a, dX_a, dXl_a);
    double ap, ad;
    step_bounds(dX_a, dXl_a, dS_a, dSl_a, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);

    double mu_aff = 0.0;
    for (int k = 0; k < nblk; ++k) {
      if (p.blocks[k].sdp) {
        int d = p.blocks[k].d;
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c)
            mu_aff += (it.X[k](r, c) + ap * dX_a[k](r, c)) * (it.S[k](r, c) + ad * dS_a[k](r, c));
      } else {
        for (int i = 0; i < p.blocks[k].d; ++i)
          mu_aff += (it.xl[k][i] + ap * dXl_a[k][i]) * (it.sl[k][i] + ad * dSl_a[k][i]);
      }
    }
    mu_aff /= kdim;
    double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-6, 1.0);

    // Corrector.
    std::vector<Matrix> corr(nblk);
    std::vector<std::vector<double>> corrl(nblk);
    for (int k = 0; k < nblk; ++k) {
      if (p.blocks[k].sdp) {
        corr[k] = sinv[k] * dS_a[k] * dX_a[k];
      } else {
        corrl[k].resize(p.blocks[k].d);
        for (int i = 0; i < p.blocks[k].d; ++i)
          corrl[k][i] = sinvl[k][i] * dSl_a[k][i] * dXl_a[k][i];
      }
    }
    std::vector<double> dy;
    std::vector<Matrix> dS, dX;
    std::vector<std::vector<double>> dSl, dXl;
    newton(sigma * mu, &corr, &corrl, dy, dS, dSl, dX, dXl);
    step_bounds(dX, dXl, dS, dSl, ap, ad);
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);
    if (ipm_debug()) {
      std::vector<double> adx(m);
      apply_A(p, dX, dXl, adx);
      double err = 0.0;
      for (int i = 0; i < m; ++i) err = std::max(err, std::fabs(adx[i] - rp[i]));
      std::fprintf(stderr, "[ipm]        sigma=%9.3e ap=%.4f ad=%.4f ridge=%9.3e |A(dX)-rp|=%9.3e\n",
                   sigma, ap, ad, ridge, err);
    }

    for (int k = 0; k < nblk; ++k) {
      if (p.blocks[k].sdp) {
        it.X[k] = it.X[k] + dX[k].scaled(ap);
        it.S[k] = it.S[k] + dS[k].scaled(ad);
      } else {
        for (int i = 0; i < p.blocks[k].d; ++i) {
          it.xl[k][i] += ap * dXl[k][i];
          it.sl[k][i] += ad * dSl[k][i];
        }
      }
    }
    for (int i = 0; i < m; ++i) y[i] += ad * dy[i];
  }
  return finish(IpmOutcome::MaxIter, opts.max_iterations);
}

// Margin program: adds t with +t*I on every block plus the t >= -1 floor.
Expanded make_phase1(const Expanded& e) {
  Expanded p1 = e;
  int t = p1.nvar;
  p1.nvar += 1;
  p1.c.assign(p1.nvar, 0.0);
  p1.c[t] = 1.0;
  for (PrimBlock& b : p1.blocks) b.terms.emplace_back(t, SymMatrix::identity(b.dim));
  PrimBlock floor_blk;
  floor_blk.sdp = false;
  floor_blk.dim = 1;
  floor_blk.g0 = SymMatrix{{1.0}};
  SymMatrix one{{1.0}};
  floor_blk.terms.emplace_back(t, one);
  p1.blocks.push_back(std::move(floor_blk));
  return p1;
}

double violation(const Expanded& e, const std::vector<double>& x) {
  double v = 0.0;
  for (const PrimBlock& pb : e.blocks) {
    SymMatrix g = pb.g0;
    for (const auto& [var, coeff] : pb.terms) {
      double xv = x[var];
      if (xv != 0.0) g = g + coeff.scaled(xv);
    }
    if (pb.sdp) {
      double lam = sym_eig(g).values.front();
      v = std::max(v, std::max(0.0, -lam));
    } else {
      v = std::max(v, std::max(0.0, -g.min_entry()));
    }
  }
  return v;
}

void fill_witnesses(const ConicProgram& prog, const Expanded& e,
                    const std::vector<double>& xfull, SolveResult& res) {
  res.witnesses.clear();
  res.nn_split.assign(prog.constraints.size(), std::nullopt);
  for (size_t i = 0; i < prog.constraints.size(); ++i) {
    res.witnesses.push_back(prog.constraint_value(static_cast<int>(i), res.x));
    if (e.aux_offset[i] >= 0) {
      int d = prog.constraints[i].dim();
      SymMatrix nn(d);
      for (int r = 0; r < d; ++r)
        for (int c = r; c < d; ++c)
          nn.set(r, c, xfull[e.aux_offset[i] + sym_slot(d, r, c)]);
      res.nn_split[i] = std::move(nn);
    }
  }
}

}  // namespace

SolveResult solve(const ConicProgram& prog, const SolveOptions& opts) {
  for (const ConicConstraint& c : prog.constraints)
    if (c.cone == ConeKind::COP)
      throw UnsupportedCone("COP constraints are not solvable; use the PSDplusNN relaxation");

  Expanded e = expand(prog);
  bool has_objective = false;
  for (double v : e.c)
    if (v != 0.0) has_objective = true;

  SolveResult res;
  std::vector<double> xfull;

  // Phase I: margin feasibility.
  Expanded p1 = make_phase1(e);
  StdProblem sp1 = compile(p1);
  IpmOutcome o1 = run_ipm(sp1, opts, &e, e.nvar);
  res.iterations = o1.iterations;

  auto pack_x = [&](const std::vector<double>& full) {
    xfull.assign(full.begin(), full.begin() + e.nvar);
    res.x.assign(full.begin(), full.begin() + prog.num_vars);
  };

  if (o1.kind == IpmOutcome::EarlyFeasible) {
    pack_x(o1.y);
  } else {
    double tstar = o1.y.empty() ? std::numeric_limits<double>::infinity() : o1.y[p1.nvar - 1];
    bool trustworthy = o1.kind == IpmOutcome::Converged || o1.kind == IpmOutcome::Accepted ||
                       o1.measure <= opts.accept_tol;
    pack_x(o1.y);
    if (tstar > opts.feas_tol && trustworthy) {
      res.status = SolveStatus::Infeasible;
      res.objective = 0.0;
      res.max_violation = violation(e, xfull);
      res.duality_gap = std::fabs(o1.pobj - o1.dobj);
      res.message = "infeasibility margin t* = " + std::to_string(tstar);
      fill_witnesses(prog, e, xfull, res);
      return res;
    }
    bool witness_ok = tstar < -opts.feas_tol && explicit_feasible(e, xfull);
    if (!witness_ok) {
      res.status = o1.kind == IpmOutcome::MaxIter ? SolveStatus::MaxIterations
                                                  : SolveStatus::NumericalFailure;
      res.max_violation = violation(e, xfull);
      res.duality_gap = std::fabs(o1.pobj - o1.dobj);
      res.message = !trustworthy ? "phase-I did not converge"
                                 : "marginal feasibility (|t*| within tolerance)";
      fill_witnesses(prog, e, xfull, res);
      return res;
    }
  }

  if (!has_objective) {
    res.status = SolveStatus::Feasible;
    res.objective = 0.0;
    res.max_violation = violation(e, xfull);
    res.duality_gap = 0.0;
    fill_witnesses(prog, e, xfull, res);
    return res;
  }

  // Phase II: optimize over the expanded program.
  StdProblem sp = compile(e);
  IpmOutcome o2 = run_ipm(sp, opts, nullptr, 0);
  res.iterations += o2.iterations;
  pack_x(o2.y);
  res.objective = 0.0;
  for (int i = 0; i < prog.num_vars; ++i) res.objective += prog.objective[i] * res.x[i];
  res.max_violation = violation(e, xfull);
  res.duality_gap = std::fabs(o2.pobj - o2.dobj);
  fill_witnesses(prog, e, xfull, res);

  switch (o2.kind) {
    case IpmOutcome::Converged:
    case IpmOutcome::Accepted:
      res.status = SolveStatus::Optimal;
      if (o2.kind == IpmOutcome::Accepted)
        res.message = "accepted at relaxed tolerance " + std::to_string(o2.measure);
      break;
    case IpmOutcome::MaxIter:
      res.status = SolveStatus::MaxIterations;
      res.message = "iteration limit reached";
      break;
    default:
      res.status = SolveStatus::NumericalFailure;
      res.message = "numerical breakdown in phase II";
      break;
  }
  return res;
}

}  // namespace posgain
