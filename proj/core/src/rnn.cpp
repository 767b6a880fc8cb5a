#include "posgain/rnn.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <utility>

#include "posgain/errors.hpp"
#include "posgain/numkernel.hpp"

namespace posgain {

namespace {
// Numeric floor realizing the strictly positive diagonal scaling cone.
constexpr double kScalingFloor = 1e-6;
}  // namespace

RnnModel::RnnModel(Matrix lambda, Matrix win, Matrix wout)
    : lambda_(std::move(lambda)), win_(std::move(win)), wout_(std::move(wout)) {
  if (!lambda_.is_square()) throw DimensionError("RnnModel: Lambda must be square");
  int n = lambda_.rows();
  int m = win_.cols();
  if (win_.rows() != n) throw DimensionError("RnnModel: Win must have n rows");
  if (wout_.rows() != m || wout_.cols() != n)
    throw DimensionError("RnnModel: Wout must be m x n");
  SchurResult st = is_schur_stable(lambda_);
  if (!st) throw UnstableSystem("RnnModel: Lambda is not Schur stable: " + st.diagnostic);
}

std::vector<double> relu(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

RnnSubsystems subsystems(const RnnModel& rnn) {
  int n = rnn.state_dim();
  int m = rnn.channel_dim();
  Matrix eye_n = Matrix::identity(n);
  return RnnSubsystems{
      StateSpace(rnn.lambda(), hcat(rnn.win(), eye_n), rnn.wout(), Matrix(m, m + n)),
      StateSpace(rnn.lambda(), rnn.win(), rnn.wout(), Matrix(m, m)),
      StateSpace(rnn.lambda(), eye_n, rnn.wout(), Matrix(m, n)),
  };
}

RnnTrajectory simulate_rnn(const RnnModel& rnn, const Signal& s, const Signal& v,
                           int horizon) {
  int n = rnn.state_dim();
  int m = rnn.channel_dim();
  if (s.channels != m) throw DimensionError("simulate_rnn: s must have m channels");
  if (v.channels != n) throw DimensionError("simulate_rnn: v must have n channels");
  if (horizon < 0 || s.length() < horizon || v.length() < horizon)
    throw DimensionError("simulate_rnn: inputs shorter than the horizon");

  RnnTrajectory traj{Signal(n, horizon), Signal(m, horizon), Signal(m, horizon)};
  std::vector<double> x(n, 0.0);
  for (int k = 0; k < horizon; ++k) {
    std::vector<double> z = mat_vec(rnn.wout(), x);
    std::vector<double> pre(m);
    for (int i = 0; i < m; ++i) pre[i] = z[i] + s.samples[k][i];
    std::vector<double> w = relu(pre);

    traj.x.samples[k] = x;
    traj.z.samples[k] = z;
    traj.w.samples[k] = w;

    std::vector<double> lx = mat_vec(rnn.lambda(), x);
    std::vector<double> ww = mat_vec(rnn.win(), w);
    for (int i = 0; i < n; ++i) x[i] = lx[i] + ww[i] + v.samples[k][i];
  }
  return traj;
}

ConicProgram ssg_lmi(const RnnModel& rnn, bool with_cop, SsgLayout* layout) {
  int n = rnn.state_dim();
  int m = rnn.channel_dim();
  int ld = n + m;

  SsgLayout lay;
  lay.n = n;
  lay.m = m;

  ConicProgram prog;
  lay.p_offset = prog.add_variables(sym_dim(n));
  lay.s_offset = prog.add_variables(m);
  if (with_cop) {
    lay.q1_offset = prog.add_variables(sym_dim(m));
    lay.q2_offset = prog.add_variables(sym_dim(m));
  }
  lay.num_vars = prog.num_vars;

  ConicConstraint& lmi =
      prog.add_constraint(ConeKind::PSD, SymMatrix(ld), Sense::LessEq, 0.0, "ssg-lmi");
  // P entry (r, c): -E_rc in the state block plus [Lambda Win]^T E_rc [Lambda Win].
  Matrix lw = hcat(rnn.lambda(), rnn.win());
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      Matrix coeff(ld, ld);
      for (int i = 0; i < ld; ++i)
        for (int j = 0; j < ld; ++j)
          coeff(i, j) =
              r == c ? lw(r, i) * lw(r, j) : lw(r, i) * lw(c, j) + lw(c, i) * lw(r, j);
      coeff(r, c) -= 1.0;
      if (r != c) coeff(c, r) -= 1.0;
      lmi.terms.push_back({lay.p_offset + sym_slot(n, r, c), SymMatrix{coeff}});
    }
  // S_j: -E_jj in the channel block plus the outer square of row j of [Wout 0].
  for (int j = 0; j < m; ++j) {
    Matrix coeff(ld, ld);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) coeff(i, k) = rnn.wout()(j, i) * rnn.wout()(j, k);
    coeff(n + j, n + j) -= 1.0;
    lmi.terms.push_back({lay.s_offset + j, SymMatrix{coeff}});
  }
  if (with_cop) {
    for (int r = 0; r < m; ++r)
      for (int c = r; c < m; ++c) {
        SymMatrix coeff(ld);
        coeff.set(n + r, n + c, 1.0);
        lmi.terms.push_back({lay.q1_offset + sym_slot(m, r, c), coeff});
        lmi.terms.push_back({lay.q2_offset + sym_slot(m, r, c), coeff});
      }
  }

  ConicConstraint& p_psd =
      prog.add_constraint(ConeKind::PSD, SymMatrix(n), Sense::GreaterEq, 0.0, "P-psd");
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c)
      p_psd.terms.push_back({lay.p_offset + sym_slot(n, r, c), sym_basis(n, r, c)});

  // One scalar block per channel keeps every slack free to move.
  for (int j = 0; j < m; ++j) {
    ConicConstraint& floor_j =
        prog.add_constraint(ConeKind::NN, SymMatrix{{-kScalingFloor}}, Sense::GreaterEq,
                            0.0, "S-floor-" + std::to_string(j));
    floor_j.terms.push_back({lay.s_offset + j, SymMatrix{{1.0}}});
  }

  if (with_cop) {
    // Finish each constraint before adding the next: add_constraint can
    // reallocate and invalidate earlier references.
    ConicConstraint& q1_psd =
        prog.add_constraint(ConeKind::PSD, SymMatrix(m), Sense::GreaterEq, 0.0, "Q1-psd");
    for (int r = 0; r < m; ++r)
      for (int c = r; c < m; ++c)
        q1_psd.terms.push_back({lay.q1_offset + sym_slot(m, r, c), sym_basis(m, r, c)});
    ConicConstraint& q2_nn =
        prog.add_constraint(ConeKind::NN, SymMatrix(m), Sense::GreaterEq, 0.0, "Q2-nn");
    for (int r = 0; r < m; ++r)
      for (int c = r; c < m; ++c)
        q2_nn.terms.push_back({lay.q2_offset + sym_slot(m, r, c), sym_basis(m, r, c)});
  }

  if (layout) *layout = lay;
  return prog;
}

namespace {

struct VariantOutcome {
  FeasStatus status = FeasStatus::Indeterminate;
  std::optional<SsgWitness> witness;
  std::string note;
};

VariantOutcome run_ssg_variant(const RnnModel& rnn, bool with_cop) {
  VariantOutcome out;
  SsgLayout lay;
  ConicProgram prog = ssg_lmi(rnn, with_cop, &lay);
  SolveResult res;
  try {
    res = solve(prog);
  } catch (const Error& e) {
    out.note = e.what();
    return out;
  }
  if (res.feasible()) {
    out.status = FeasStatus::Feasible;
    SsgWitness w;
    w.p = unpack_sym(res.x, lay.p_offset, lay.n);
    w.s.assign(res.x.begin() + lay.s_offset, res.x.begin() + lay.s_offset + lay.m);
    if (with_cop) {
      w.q1 = unpack_sym(res.x, lay.q1_offset, lay.m);
      w.q2 = unpack_sym(res.x, lay.q2_offset, lay.m);
    }
    out.witness = std::move(w);
  } else if (res.status == SolveStatus::Infeasible) {
    out.status = FeasStatus::Infeasible;
  } else {
    out.note = res.message.empty() ? "solver did not classify" : res.message;
  }
  return out;
}

}  // namespace

StabilityVerdict certify(const RnnModel& rnn, const CertifyOptions& opts) {
  StabilityVerdict out;

  VariantOutcome plain = run_ssg_variant(rnn, false);
  out.ssg = plain.status;
  out.ssg_witness = std::move(plain.witness);
  if (!plain.note.empty()) out.notes.push_back("ssg: " + plain.note);

  VariantOutcome cop = run_ssg_variant(rnn, true);
  out.ssg_cop = cop.status;
  out.ssg_cop_witness = std::move(cop.witness);
  if (!cop.note.empty()) out.notes.push_back("ssg+cop: " + cop.note);

  if (!opts.compute_gains || out.ssg_cop != FeasStatus::Feasible) return out;

  RnnSubsystems subs = subsystems(rnn);
  try {
    out.gamma0_pos = upper_bound_pos(subs.g0, opts.lift_order, opts.tol);
  } catch (const Error& e) {
    out.notes.push_back(std::string("gamma0 estimate: ") + e.what());
  }
  try {
    out.gamma1 = hinf_norm(subs.g1, opts.tol);
  } catch (const Error& e) {
    out.notes.push_back(std::string("gamma1: ") + e.what());
  }

  if (out.gamma0_pos && out.gamma1 && *out.gamma0_pos < 1.0) {
    double g0 = *out.gamma0_pos;
    double g1 = *out.gamma1;
    Matrix comb{{g0 / (1.0 - g0), g1 / (1.0 - g0)}, {1.0 / (1.0 - g0), g1 / (1.0 - g0)}};
    out.certified_gain = std::sqrt(2.0) * spectral_norm(comb);
  } else if (out.gamma0_pos && *out.gamma0_pos >= 1.0) {
    out.notes.push_back("gamma0 estimate >= 1, closed-loop gain bound unavailable");
  }
  return out;
}

bool gain_combination_lemma_check(double a, double b, double c, double d, int trials,
                                  unsigned seed) {
  if (a < 0.0 || b < 0.0 || c < 0.0 || d < 0.0)
    throw InvalidInput("gain_combination_lemma_check: coefficients must be nonnegative");
  Matrix k{{a, b}, {c, d}};
  double factor = std::sqrt(2.0) * spectral_norm(k);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 5);

  auto random_vec = [&](int len) {
    std::vector<double> v(len);
    for (double& x : v) x = gauss(rng);
    return v;
  };
  auto scale_to = [&](std::vector<double> v, double target) {
    double norm = vec_norm(v);
    if (norm == 0.0) return std::vector<double>(v.size(), 0.0);
    for (double& x : v) x *= target / norm;
    return v;
  };

  for (int t = 0; t < trials; ++t) {
    std::vector<double> s = random_vec(dim(rng));
    std::vector<double> v = random_vec(dim(rng));
    double ns = vec_norm(s), nv = vec_norm(v);
    // Premises |z| <= a|s| + b|v| and |w| <= c|s| + d|v| hold by scaling.
    std::vector<double> z = scale_to(random_vec(dim(rng)), unif(rng) * (a * ns + b * nv));
    std::vector<double> w = scale_to(random_vec(dim(rng)), unif(rng) * (c * ns + d * nv));
    double lhs = std::hypot(vec_norm(z), vec_norm(w));
    double rhs = factor * std::hypot(ns, nv);
    if (lhs > rhs + 1e-12 * (1.0 + rhs)) return false;
  }
  return true;
}

std::vector<SweepCell> region_sweep(const RnnModel& base, const AxisRange& a_range,
                                    const AxisRange& b_range) {
  if (a_range.steps < 1 || b_range.steps < 1)
    throw InvalidInput("region_sweep: steps must be >= 1");
  if (base.win().rows() < 3 || base.win().cols() < 3)
    throw DimensionError("region_sweep: Win must be at least 3 x 3");

  auto grid = [](const AxisRange& r) {
    std::vector<double> g(r.steps);
    for (int i = 0; i < r.steps; ++i)
      g[i] = r.steps == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (r.steps - 1);
    return g;
  };
  std::vector<double> avals = grid(a_range);
  std::vector<double> bvals = grid(b_range);

  std::vector<SweepCell> cells(avals.size() * bvals.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t idx; (idx = next.fetch_add(1)) < cells.size();) {
      double a = avals[idx / bvals.size()];
      double b = bvals[idx % bvals.size()];
      SweepCell cell{a, b, CellClass::Indeterminate};
      try {
        Matrix win = base.win();
        win(0, 2) += a;
        win(2, 1) = b;
        RnnModel model(base.lambda(), win, base.wout());
        CertifyOptions fast;
        fast.compute_gains = false;
        StabilityVerdict v = certify(model, fast);
        if (v.ssg != FeasStatus::Indeterminate && v.ssg_cop != FeasStatus::Indeterminate) {
          if (v.ssg_cop == FeasStatus::Feasible)
            cell.cls = v.ssg == FeasStatus::Feasible ? CellClass::Both : CellClass::CopOnly;
          else if (v.ssg == FeasStatus::Infeasible)
            cell.cls = CellClass::Neither;
          // ssg feasible with ssg+cop infeasible contradicts the cone
          // inclusion; left Indeterminate.
        }
      } catch (const Error&) {
        // left Indeterminate
      }
      cells[idx] = cell;
    }
  };

  size_t nthreads = std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, cells.size());
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (size_t i = 0; i + 1 < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  return cells;
}

}  // namespace posgain
