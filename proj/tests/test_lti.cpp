#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "posgain/errors.hpp"
#include "posgain/lti.hpp"
#include "posgain/numkernel.hpp"

using namespace posgain;

namespace {

StateSpace delay() {
  return StateSpace{Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}};
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

TEST_CASE("statespace validation") {
  CHECK_THROWS_AS(StateSpace(Matrix(2, 3), Matrix(2, 1), Matrix(1, 2), Matrix(1, 1)),
                  DimensionError);
  CHECK_THROWS_AS(StateSpace(Matrix(2, 2), Matrix(3, 1), Matrix(1, 2), Matrix(1, 1)),
                  DimensionError);
  CHECK_THROWS_AS(StateSpace(Matrix(2, 2), Matrix(2, 1), Matrix(1, 3), Matrix(1, 1)),
                  DimensionError);
  CHECK_THROWS_AS(StateSpace(Matrix(2, 2), Matrix(2, 1), Matrix(1, 2), Matrix(2, 2)),
                  DimensionError);
  StateSpace ok(Matrix(2, 2), Matrix(2, 3), Matrix(4, 2), Matrix(4, 3));
  CHECK(ok.n() == 2);
  CHECK(ok.nw() == 3);
  CHECK(ok.nz() == 4);
}

TEST_CASE("simulate unit delay impulse") {
  SimResult r = simulate(delay(), Signal::impulse(1, 4), 4);
  CHECK(r.z.samples[0][0] == 0.0);
  CHECK(r.z.samples[1][0] == 1.0);
  CHECK(r.z.samples[2][0] == 0.0);
  CHECK(r.z.samples[3][0] == 0.0);
  CHECK(r.z.l2_norm() == doctest::Approx(1.0));
}

TEST_CASE("simulate matches the explicit recursion") {
  std::mt19937_64 rng(3);
  StateSpace sys = random_system(3, 2, 2, rng);
  Signal w = Signal::random_nonneg(2, 10, 7);
  SimResult r = simulate(sys, w, 10);

  std::vector<double> x(3, 0.0);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> z = mat_vec(sys.C, x);
    std::vector<double> dw = mat_vec(sys.D, w.samples[k]);
    for (int i = 0; i < 2; ++i) CHECK(r.z.samples[k][i] == doctest::Approx(z[i] + dw[i]));
    std::vector<double> ax = mat_vec(sys.A, x);
    std::vector<double> bw = mat_vec(sys.B, w.samples[k]);
    for (int i = 0; i < 3; ++i) x[i] = ax[i] + bw[i];
  }

  CHECK_THROWS_AS(simulate(sys, Signal::zeros(1, 10), 10), DimensionError);
  CHECK_THROWS_AS(simulate(sys, Signal::zeros(2, 5), 10), DimensionError);
}

TEST_CASE("signal generators") {
  Signal imp = Signal::impulse(2, 3);
  CHECK(imp.samples[0][1] == 1.0);
  CHECK(imp.samples[1][1] == 0.0);

  Signal st = Signal::step(2, 3);
  CHECK(st.samples[2][0] == 1.0);
  CHECK(st.l2_norm() == doctest::Approx(std::sqrt(6.0)));

  Signal ra = Signal::random_nonneg(3, 5, 42);
  Signal rb = Signal::random_nonneg(3, 5, 42);
  Signal rc = Signal::random_nonneg(3, 5, 43);
  CHECK(ra.entrywise_nonneg());
  CHECK(ra.samples == rb.samples);
  CHECK(ra.samples != rc.samples);
}

TEST_CASE("lift block structure") {
  std::mt19937_64 rng(5);
  StateSpace sys = random_system(2, 1, 1, rng);
  LiftedSystem lf = lift(sys, 3);

  CHECK(lf.order == 3);
  CHECK((lf.hatA - mat_pow(sys.A, 3)).max_abs() < 1e-14);
  // hatB = [A^2 B, A B, B]
  CHECK((lf.hatB.block(0, 0, 2, 1) - mat_pow(sys.A, 2) * sys.B).max_abs() < 1e-14);
  CHECK((lf.hatB.block(0, 2, 2, 1) - sys.B).max_abs() < 1e-14);
  // hatC = [C; CA; CA^2]
  CHECK((lf.hatC.block(1, 0, 1, 2) - sys.C * sys.A).max_abs() < 1e-14);
  // hatD lower block-Toeplitz: diagonal D, first subdiagonal CB
  CHECK(lf.hatD(0, 0) == sys.D(0, 0));
  CHECK(lf.hatD(1, 1) == sys.D(0, 0));
  CHECK(lf.hatD(0, 1) == 0.0);
  CHECK(lf.hatD(0, 2) == 0.0);
  CHECK(lf.hatD(1, 0) == doctest::Approx((sys.C * sys.B)(0, 0)));
  CHECK(lf.hatD(2, 1) == doctest::Approx((sys.C * sys.B)(0, 0)));
  CHECK(lf.hatD(2, 0) == doctest::Approx((sys.C * sys.A * sys.B)(0, 0)));

  CHECK_THROWS_AS(lift(sys, 0), InvalidOrder);
}

TEST_CASE("lifting composition identities") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 4; ++trial) {
    StateSpace sys = random_system(2 + trial % 3, 1 + trial % 2, 2, rng);
    CHECK(lifting_identities_check(sys, 1, 1));
    CHECK(lifting_identities_check(sys, 2, 3));
    CHECK(lifting_identities_check(sys, 4, 2));
  }
}

TEST_CASE("lifted simulation reproduces the plain one") {
  std::mt19937_64 rng(13);
  StateSpace sys = random_system(3, 2, 1, rng);
  const int N = 4, super = 5;

  Signal w = Signal::random_nonneg(2, N * super, 21);
  SimResult plain = simulate(sys, w, N * super);

  StateSpace lifted = lifted_to_statespace(lift(sys, N));
  Signal packed = pack_signal(w, N);
  CHECK(packed.channels == 2 * N);
  SimResult lsim = simulate(lifted, packed, super);

  Signal unz = unpack_signal(lsim.z, 1, N);
  for (int k = 0; k < N * super; ++k)
    CHECK(unz.samples[k][0] == doctest::Approx(plain.z.samples[k][0]).epsilon(1e-10));

  // norms are preserved by the reblocking
  CHECK(packed.l2_norm() == doctest::Approx(w.l2_norm()));
}

TEST_CASE("pack_signal zero-pads the tail") {
  Signal w = Signal::step(1, 5);
  Signal p = pack_signal(w, 2);
  CHECK(p.length() == 3);
  CHECK(p.samples[2][0] == 1.0);
  CHECK(p.samples[2][1] == 0.0);
  Signal u = unpack_signal(p, 1, 2);
  CHECK(u.length() == 6);
  CHECK(u.samples[4][0] == 1.0);
  CHECK(u.samples[5][0] == 0.0);
}
