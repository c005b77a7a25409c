#include <cmath>

#include "doctest.h"
#include "douglab/linalg.hpp"
#include "douglab/rng.hpp"

using namespace douglab;

TEST_CASE("solve_lyapunov closed forms") {
  const Matrix x = solve_lyapunov(-Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK((x - 0.5 * Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0).epsilon(1e-12));

  const Matrix xs = solve_lyapunov((Matrix(1, 1) << -2.0).finished(),
                                   (Matrix(1, 1) << 4.0).finished());
  CHECK(xs(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve_lyapunov residual on a random Hurwitz matrix") {
  RandomStream rng(1, 0);
  Matrix p(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p(i, j) = rng.normal();
  const Matrix a = -p * p.transpose() - 0.5 * Matrix::Identity(3, 3);
  const Matrix q = Matrix::Identity(3, 3);
  const Matrix x = solve_lyapunov(a, q);
  CHECK((a.transpose() * x + x * a + q).norm() <= 1e-10 * (1.0 + q.norm()));
  CHECK((x - x.transpose()).norm() == 0.0);  // symmetrized exactly
}

TEST_CASE("is_hurwitz") {
  CHECK(is_hurwitz(-Matrix::Identity(3, 3)));
  CHECK_FALSE(is_hurwitz(Matrix::Identity(3, 3)));
  // skew rotation: eigenvalues +-i, zero real part
  CHECK_FALSE(is_hurwitz((Matrix(2, 2) << 0.0, -1.0, 1.0, 0.0).finished()));
}

TEST_CASE("symmetric_eigen") {
  const auto d31 = symmetric_eigen((Matrix(2, 2) << 3.0, 0.0, 0.0, 1.0).finished());
  CHECK(d31.values(0) == doctest::Approx(1.0));
  CHECK(d31.values(1) == doctest::Approx(3.0));

  const auto id4 = symmetric_eigen(Matrix::Identity(4, 4));
  for (int i = 0; i < 4; ++i) CHECK(id4.values(i) == doctest::Approx(1.0));

  const Matrix s = (Matrix(2, 2) << 2.0, 1.0, 1.0, 2.0).finished();
  const auto e = symmetric_eigen(s);
  CHECK(e.values(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.values(1) == doctest::Approx(3.0).epsilon(1e-12));
  // residuals and orthonormality
  for (int i = 0; i < 2; ++i)
    CHECK((s * e.vectors.col(i) - e.values(i) * e.vectors.col(i)).norm() <=
          1e-10 * s.norm());
  CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(2, 2)).norm() <= 1e-10);

  CHECK_THROWS_AS(symmetric_eigen((Matrix(2, 2) << 0.0, 1.0, 0.0, 0.0).finished()),
                  NotSymmetric);
}

TEST_CASE("spd_sqrt") {
  CHECK((spd_sqrt(SpdMatrix(Matrix::Identity(3, 3))) - Matrix::Identity(3, 3)).norm() <=
        1e-12);
  const Matrix d49 = (Matrix(2, 2) << 4.0, 0.0, 0.0, 9.0).finished();
  const Matrix r = spd_sqrt(SpdMatrix(d49));
  CHECK(r(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r(1, 1) == doctest::Approx(3.0).epsilon(1e-12));

  const Matrix s = (Matrix(2, 2) << 2.0, 1.0, 1.0, 2.0).finished();
  const Matrix m = spd_sqrt(SpdMatrix(s));
  CHECK((m * m - s).norm() <= 1e-10 * s.norm());

  CHECK_THROWS_AS(SpdMatrix((Matrix(2, 2) << 1.0, 2.0, 2.0, 1.0).finished()), NotPd);
}

TEST_CASE("v_norm") {
  const SpdMatrix eye(Matrix::Identity(2, 2));
  CHECK(v_norm((Vector(2) << 1.0, 0.0).finished(), eye) == doctest::Approx(1.0));
  const SpdMatrix d49((Matrix(2, 2) << 4.0, 0.0, 0.0, 9.0).finished());
  CHECK(v_norm((Vector(2) << 1.0, 1.0).finished(), d49) ==
        doctest::Approx(std::sqrt(13.0)));
  const SpdMatrix v((Matrix(2, 2) << 2.0, 1.0, 1.0, 2.0).finished());
  CHECK(v_norm((Vector(2) << 1.0, 0.0).finished(), v) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(v_norm(Vector::Zero(3), v), DimensionMismatch);
}

TEST_CASE("v_operator_norm") {
  const SpdMatrix v((Matrix(2, 2) << 2.0, 1.0, 1.0, 2.0).finished());
  CHECK(v_operator_norm(Matrix::Identity(2, 2), v) == doctest::Approx(1.0));
  CHECK(v_operator_norm(-2.5 * Matrix::Identity(2, 2), v) == doctest::Approx(2.5));
  const SpdMatrix eye(Matrix::Identity(2, 2));
  CHECK(v_operator_norm((Matrix(2, 2) << 2.0, 0.0, 0.0, -3.0).finished(), eye) ==
        doctest::Approx(3.0));
}
