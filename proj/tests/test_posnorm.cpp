#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "posgain/errors.hpp"
#include "posgain/numkernel.hpp"
#include "posgain/posnorm.hpp"

using namespace posgain;

namespace {

StateSpace delay() {
  return StateSpace{Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}};
}

StateSpace static_gain(double d) {
  return StateSpace{Matrix{{0.0}}, Matrix{{0.0}}, Matrix{{0.0}}, Matrix{{d}}};
}

StateSpace random_system(int n, int nw, int nz, std::mt19937_64& rng, double radius = 0.8) {
  std::normal_distribution<double> g;
  auto fill = [&](int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
  };
  Matrix a = fill(n, n);
  double s = spectral_norm(a);
  if (s > 0.0) a = a.scaled(radius / s);
  return StateSpace{a, fill(n, nw), fill(nz, n), fill(nz, nw)};
}

}  // namespace

TEST_CASE("gain lmi layout and unit-delay feasible interval") {
  // Unit delay at gamma = 1.1: L(P) = diag(1 - P, P - 1.21), so the LMI is
  // strictly feasible exactly for P in (1, 1.21).
  GainLmiLayout lay;
  ConicProgram prog = build_gain_lmi(delay(), 1.1, false, &lay);
  CHECK(lay.nx == 1);
  CHECK(lay.nw == 1);
  CHECK(lay.p_offset == 0);
  CHECK(lay.q1_offset == -1);
  CHECK(lay.q2_offset == -1);
  CHECK(lay.num_vars == 1);
  REQUIRE(prog.constraints.size() == 2);
  CHECK(prog.constraints[0].label == "gain-lmi");
  CHECK(prog.constraints[0].sense == Sense::LessEq);
  CHECK(prog.constraints[1].label == "P-psd");

  SymMatrix at_mid = prog.constraint_value(0, {1.1});
  CHECK(at_mid(0, 0) == doctest::Approx(-0.1));
  CHECK(at_mid(1, 1) == doctest::Approx(-0.11));
  CHECK(at_mid(0, 1) == doctest::Approx(0.0));
  double eps = prog.constraints[0].margin;
  CHECK(eps > 0.0);
  CHECK(eps < 1e-6);
  CHECK(in_psd(at_mid.scaled(-1.0) - SymMatrix::identity(2).scaled(eps), 1e-12));

  // P = 0.9 lies outside the interval: the state block goes positive.
  SymMatrix at_low = prog.constraint_value(0, {0.9});
  CHECK(at_low(0, 0) == doctest::Approx(0.1));
  CHECK_FALSE(in_psd(at_low.scaled(-1.0) - SymMatrix::identity(2).scaled(eps), 1e-12));

  SolveResult res = solve(prog);
  REQUIRE(res.feasible());
  double p = res.x[lay.p_offset];
  CHECK(p > 1.0);
  CHECK(p < 1.21);

  // Below the norm the family is infeasible.
  SolveResult tight = solve(build_gain_lmi(delay(), 0.9, false));
  CHECK(tight.status == SolveStatus::Infeasible);
}

TEST_CASE("gain lmi layout with relaxation variables") {
  std::mt19937_64 rng(11);
  StateSpace sys = random_system(2, 2, 1, rng);
  GainLmiLayout lay;
  ConicProgram prog = build_gain_lmi(sys, 3.0, true, &lay);
  CHECK(lay.p_offset == 0);
  CHECK(lay.q1_offset == sym_dim(2));
  CHECK(lay.q2_offset == 2 * sym_dim(2));
  CHECK(lay.num_vars == 3 * sym_dim(2));
  REQUIRE(prog.constraints.size() == 4);
  CHECK(prog.constraints[0].dim() == 4);
  CHECK(prog.constraints[2].label == "Q1-psd");
  CHECK(prog.constraints[3].label == "Q2-nn");
  CHECK(prog.constraints[3].cone == ConeKind::NN);
  CHECK_THROWS_AS(build_gain_lmi(sys, 0.0, true), InvalidInput);
}

TEST_CASE("hinf norm of reference systems") {
  CHECK(hinf_norm(delay(), 1e-6) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(hinf_norm(static_gain(2.0), 1e-6) == doctest::Approx(2.0).epsilon(1e-4));
  StateSpace unstable{Matrix{{1.5}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}};
  CHECK_THROWS_AS(hinf_norm(unstable), UnstableSystem);
}

TEST_CASE("order-1 upper bound matches hinf for single-input systems") {
  // With one input the relaxation term is a scalar q >= 0 that only tightens
  // the LMI, so the positive-gain bisection lands on the hinf value.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    StateSpace sys = random_system(3, 1, 2, rng);
    double hinf = hinf_norm(sys, 1e-5);
    double up = upper_bound_pos(sys, 1, 1e-5);
    CHECK(std::fabs(up - hinf) <= 2e-5 * (1.0 + hinf));
  }
}

TEST_CASE("lower bound never exceeds the upper bound") {
  std::mt19937_64 rng(23);
  StateSpace sys = random_system(3, 2, 2, rng);
  for (int order : {1, 2, 3}) {
    double up = upper_bound_pos(sys, order, 1e-5);
    double lo = lower_bound_pos(sys, order, 1e-5);
    CHECK(lo <= up + 1e-4 * (1.0 + up));
  }
}

TEST_CASE("lower bound witness replays") {
  std::mt19937_64 rng(29);
  StateSpace sys = random_system(3, 2, 2, rng);
  LowerBoundWitness w;
  double lo = lower_bound_pos(sys, 3, 1e-6, &w);
  CHECK(w.order == 3);
  CHECK(w.value == doctest::Approx(lo));
  CHECK(w.sdp_value >= w.value - 1e-9);

  // v_star is an admissible input direction reproducing the bound.
  double norm = vec_norm(w.v_star);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  for (double vi : w.v_star) CHECK(vi >= -1e-12);
  LiftedSystem lf = lift(sys, 3);
  CHECK(vec_norm(mat_vec(lf.hatD, w.v_star)) == doctest::Approx(lo).epsilon(1e-9));

  // z_star is a trace-one doubly nonnegative optimizer.
  CHECK(w.z_star.trace() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(in_psd(w.z_star, 1e-7));
  CHECK(in_nn(w.z_star, 1e-7));
}

TEST_CASE("degenerate lower bound at order one of the delay") {
  // hatD = [[0]]: the relaxation is a single fixed point with value zero.
  LowerBoundWitness w;
  CHECK(lower_bound_pos(delay(), 1, 1e-6, &w) == 0.0);
  CHECK(w.rank_one_exact);
  CHECK(w.z_star.trace() == doctest::Approx(1.0));
}

TEST_CASE("certificates replay without a solver") {
  std::mt19937_64 rng(41);
  StateSpace sys = random_system(3, 2, 2, rng);
  GainCertificate cert;
  double up = upper_bound_pos(sys, 2, 1e-4, &cert);
  CHECK(cert.gamma == doctest::Approx(up));
  CHECK(cert.order == 2);
  CHECK(verify_certificate(sys, cert).ok);

  GainCertificate bad = cert;
  bad.gamma *= 0.5;
  CertCheck c = verify_certificate(sys, bad);
  CHECK_FALSE(c.ok);
  CHECK(c.violated.find("negative semidefinite") != std::string::npos);

  bad = cert;
  bad.p = SymMatrix::identity(3).scaled(-1.0);
  CHECK(verify_certificate(sys, bad).violated == "P not positive semidefinite");

  bad = cert;
  bad.q2.set(0, 1, -1.0);
  CHECK(verify_certificate(sys, bad).violated == "Q2 not entrywise nonnegative");

  bad = cert;
  bad.p = SymMatrix::identity(4);
  CHECK(verify_certificate(sys, bad).violated == "P dimension mismatch");

  bad = cert;
  bad.order = 0;
  CHECK(verify_certificate(sys, bad).violated == "lifting order must be >= 1");

  bad = cert;
  bad.gamma = 0.0;
  CHECK(verify_certificate(sys, bad).violated == "gamma must be positive");
}

TEST_CASE("composition carries certificates to multiples of the order") {
  std::mt19937_64 rng(43);
  StateSpace sys = random_system(3, 2, 2, rng);
  GainCertificate cert;
  upper_bound_pos(sys, 2, 1e-4, &cert);
  CHECK(theorem2_composition_check(sys, 2, 1, cert).ok);
  CHECK(theorem2_composition_check(sys, 2, 2, cert).ok);
  CHECK(theorem2_composition_check(sys, 2, 3, cert).ok);

  CertCheck c = theorem2_composition_check(sys, 2, 0, cert);
  CHECK(c.violated.find("composition factor") != std::string::npos);
  c = theorem2_composition_check(sys, 3, 2, cert);
  CHECK(c.violated == "certificate order mismatch");
}

TEST_CASE("exact positive matrix norm on small matrices") {
  CHECK(pos_matnorm_exact_small(Matrix{{3.0}}) == doctest::Approx(3.0).epsilon(1e-5));
  // Cancellation matrix: the positive-cone norm is 1, the spectral norm sqrt(2).
  Matrix cancel{{1.0, -1.0}, {0.0, 0.0}};
  CHECK(spectral_norm(cancel) == doctest::Approx(std::sqrt(2.0)));
  CHECK(pos_matnorm_exact_small(cancel) == doctest::Approx(1.0).epsilon(1e-5));
  // All-ones 2x2: maximized on the positive diagonal, value 2.
  Matrix ones{{1.0, 1.0}, {1.0, 1.0}};
  CHECK(pos_matnorm_exact_small(ones) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(pos_matnorm_exact_small(Matrix(2, 2)) == 0.0);
  CHECK_THROWS_AS(pos_matnorm_exact_small(Matrix(2, 5)), ColumnCountExceeded);
}

TEST_CASE("sampled positive norm brackets the exact one") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    Matrix m(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
    double exact = pos_matnorm_exact_small(m, 1e-8);
    double sampled = pos_matnorm_bruteforce(m, 2000, 7);
    CHECK(sampled <= exact + 1e-6);
    CHECK(exact - sampled <= 2e-2 * (1.0 + exact));
  }
  CHECK(pos_matnorm_bruteforce(Matrix{{1.0}}, 10, 1) ==
        pos_matnorm_bruteforce(Matrix{{1.0}}, 10, 1));
  CHECK_THROWS_AS(pos_matnorm_bruteforce(Matrix(2, 21), 10), ColumnCountExceeded);
}

TEST_CASE("bound sweep collects every order") {
  BoundReport rep = bound_sweep(delay(), 3, 1e-4);
  CHECK(rep.hinf == doctest::Approx(1.0).epsilon(1e-3));
  REQUIRE(rep.rows.size() == 3);
  for (int n = 1; n <= 3; ++n) {
    const BoundRow& row = rep.rows[n - 1];
    CHECK(row.order == n);
    REQUIRE(row.upper.has_value());
    REQUIRE(row.lower.has_value());
    // The delay has positive gain exactly 1 at every order.
    CHECK(*row.upper == doctest::Approx(1.0).epsilon(5e-3));
    if (n >= 2) CHECK(*row.lower == doctest::Approx(1.0).epsilon(5e-3));
  }
  CHECK(rep.warnings.empty());
  REQUIRE(rep.best_upper.has_value());
  REQUIRE(rep.best_lower.has_value());
  CHECK(*rep.best_lower <= *rep.best_upper + 1e-3);

  CHECK_THROWS_AS(bound_sweep(delay(), 0), InvalidOrder);
  StateSpace unstable{Matrix{{1.01}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}};
  CHECK_THROWS_AS(bound_sweep(unstable, 2), UnstableSystem);
}

TEST_CASE("unstable systems are rejected by the bound routines") {
  StateSpace unstable{Matrix{{1.2}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}};
  CHECK_THROWS_AS(upper_bound_pos(unstable, 2), UnstableSystem);
}
