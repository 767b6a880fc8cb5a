#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "posgain/errors.hpp"
#include "posgain/matrix.hpp"

using namespace posgain;

TEST_CASE("construction and validation") {
  Matrix m{{1.0, 2.0}, {3.0, 4.0}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m(1, 0) == 3.0);

  CHECK_THROWS_AS((Matrix{{1.0}, {2.0, 3.0}}), DimensionError);
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
  double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((Matrix{{inf}}), InvalidInput);
  CHECK_THROWS_AS((Matrix{{std::nan("")}}), InvalidInput);
}

TEST_CASE("arithmetic") {
  Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  Matrix b{{0.0, 1.0}, {1.0, 0.0}};

  Matrix ab = a * b;
  CHECK(ab(0, 0) == 2.0);
  CHECK(ab(0, 1) == 1.0);
  CHECK(ab(1, 0) == 4.0);
  CHECK(ab(1, 1) == 3.0);

  Matrix s = a + b - b;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) CHECK(s(r, c) == a(r, c));

  CHECK(a.scaled(2.0)(1, 1) == 8.0);
  CHECK(a.transpose()(0, 1) == 3.0);
  CHECK_THROWS_AS(a * Matrix(3, 3), DimensionError);
  CHECK_THROWS_AS(a + Matrix(3, 3), DimensionError);
}

TEST_CASE("blocks and concatenation") {
  Matrix a = Matrix::identity(2);
  Matrix z = Matrix::zeros(2, 2);
  Matrix h = hcat(a, z);
  CHECK(h.rows() == 2);
  CHECK(h.cols() == 4);
  CHECK(h(0, 0) == 1.0);
  CHECK(h(0, 2) == 0.0);

  Matrix v = vcat(a, z);
  CHECK(v.rows() == 4);
  CHECK(v(3, 1) == 0.0);

  Matrix m(3, 3);
  m.set_block(1, 1, Matrix{{5.0, 6.0}, {7.0, 8.0}});
  CHECK(m(2, 2) == 8.0);
  Matrix sub = m.block(1, 1, 2, 2);
  CHECK(sub(0, 1) == 6.0);
  CHECK_THROWS_AS(m.set_block(2, 2, a), DimensionError);
  CHECK_THROWS_AS(m.block(2, 2, 2, 2), DimensionError);
}

TEST_CASE("mat_pow and mat_vec") {
  Matrix a{{1.0, 1.0}, {0.0, 1.0}};
  Matrix a3 = mat_pow(a, 3);
  CHECK(a3(0, 1) == 3.0);
  CHECK(mat_pow(a, 0)(0, 0) == 1.0);
  CHECK(mat_pow(a, 0)(0, 1) == 0.0);
  CHECK_THROWS_AS(mat_pow(a, -1), InvalidInput);

  auto y = mat_vec(a, {2.0, 3.0});
  CHECK(y[0] == 5.0);
  CHECK(y[1] == 3.0);
}

TEST_CASE("norms") {
  Matrix a{{3.0, 0.0}, {0.0, -4.0}};
  CHECK(a.frobenius_norm() == doctest::Approx(5.0));
  CHECK(a.max_abs() == 4.0);
}

TEST_CASE("symmetric matrix") {
  SymMatrix s{Matrix{{1.0, 2.0}, {0.0, 3.0}}};
  // construction symmetrizes
  CHECK(s(0, 1) == doctest::Approx(1.0));
  CHECK(s(0, 1) == s(1, 0));

  SymMatrix t(2);
  t.set(0, 1, 5.0);
  CHECK(t(1, 0) == 5.0);
  t.add(0, 1, 1.0);
  CHECK(t(0, 1) == 6.0);

  SymMatrix i2 = SymMatrix::identity(2);
  CHECK(i2.trace() == 2.0);
  CHECK((i2 + i2).trace() == 4.0);
  CHECK((i2 - i2).frobenius_norm() == 0.0);
  CHECK(i2.scaled(-2.0).min_entry() == -2.0);

  CHECK_THROWS_AS(SymMatrix{Matrix(2, 3)}, DimensionError);
  CHECK(sym_dim(4) == 10);
}
