#include <cmath>

#include "doctest.h"
#include "douglab/transport.hpp"

using namespace douglab;

namespace {

SampleSet column(std::initializer_list<double> vals) {
  SampleSet s(static_cast<long long>(vals.size()), 1);
  long long i = 0;
  for (double v : vals) s(i++, 0) = v;
  return s;
}

// Simpson quadrature of the normal density on [x, 40]; oracle for the CCDF.
double ccdf_quadrature(double x) {
  const double hi = 40.0;
  const int n = 200000;
  const double h = (hi - x) / n;
  double acc = normal_pdf(x) + normal_pdf(hi);
  for (int i = 1; i < n; ++i)
    acc += normal_pdf(x + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("w1_1d closed cases") {
  CHECK(w1_1d(column({0.3, -1.0, 2.0}), column({0.3, -1.0, 2.0}), 0).value == 0.0);
  CHECK(w1_1d(column({0.0, 2.0}), column({1.0, 3.0}), 0).value ==
        doctest::Approx(1.0));
  CHECK(w1_1d(column({0.0, 1.0, 2.0}), column({0.0, 0.0, 3.0}), 0).value ==
        doctest::Approx(2.0 / 3.0));
  // unequal sizes go through the merged-CDF integral
  CHECK(w1_1d(column({0.0, 1.0}), column({0.5}), 0).value == doctest::Approx(0.5));
  CHECK_THROWS_AS(w1_1d(SampleSet(0, 1), column({1.0}), 0), EmptySample);
}

TEST_CASE("exact matching") {
  SampleSet x(2, 2), y(2, 2);
  x << 0, 0, 2, 0;
  y << 1, 0, 3, 0;
  CHECK(w1_exact_matching(x, y, 0).value == doctest::Approx(1.0));
  SampleSet perm(2, 2);
  perm << 2, 0, 0, 0;  // permutation of x
  CHECK(w1_exact_matching(x, perm, 0).value == doctest::Approx(0.0));
  SampleSet big(513, 1);
  big.setZero();
  CHECK_THROWS_AS(w1_exact_matching(big, big, 0), TooLarge);
}

TEST_CASE("sliced") {
  RandomStream rng(4, 0);
  SampleSet x(64, 3);
  for (int i = 0; i < 64; ++i)
    for (int c = 0; c < 3; ++c) x(i, c) = rng.normal();
  RandomStream prng(4, 1);
  CHECK(w1_sliced(x, x, 16, prng, 0).value == doctest::Approx(0.0));

  // in one dimension slicing reduces to the exact 1-D distance
  SampleSet a(32, 1), b(32, 1);
  for (int i = 0; i < 32; ++i) {
    a(i, 0) = rng.normal();
    b(i, 0) = rng.normal() + 0.4;
  }
  RandomStream prng2(4, 2);
  CHECK(w1_sliced(a, b, 7, prng2, 0).value ==
        doctest::Approx(w1_1d(a, b, 0).value).epsilon(1e-12));
}

TEST_CASE("gaussian sampling") {
  RandomStream rng(6, 0);
  const SampleSet s = sample_gaussian(SpdMatrix(Matrix::Identity(2, 2)), 100000, rng);
  Matrix cov = Matrix::Zero(2, 2);
  for (long long i = 0; i < s.rows(); ++i)
    cov += s.row(i).transpose() * s.row(i);
  cov /= static_cast<double>(s.rows());
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        4.0 * std::sqrt(2.0 / 100000.0));

  RandomStream r4(6, 1);
  const SampleSet v = sample_gaussian(SpdMatrix((Matrix(1, 1) << 4.0).finished()),
                                      100000, r4);
  double var = 0;
  for (long long i = 0; i < v.rows(); ++i) var += v(i, 0) * v(i, 0);
  var /= static_cast<double>(v.rows());
  CHECK(std::abs(var - 4.0) <= 4.0 * 4.0 * std::sqrt(2.0 / 100000.0));

  RandomStream ra(7, 42), rb(7, 42);
  CHECK(sample_gaussian(SpdMatrix(Matrix::Identity(1, 1)), 1, ra)(0, 0) ==
        sample_gaussian(SpdMatrix(Matrix::Identity(1, 1)), 1, rb)(0, 0));
}

TEST_CASE("w1_gaussian_1d") {
  CHECK(w1_gaussian_1d(0.7, 0.7) == 0.0);
  CHECK(w1_gaussian_1d(1.0, 0.0) == doctest::Approx(std::sqrt(2.0 / M_PI)));
  CHECK(w1_gaussian_1d(2.0, 1.0) == doctest::Approx(std::sqrt(2.0 / M_PI)));
}

TEST_CASE("directional tails") {
  SampleSet s(1000, 1);
  for (int i = 0; i < 1000; ++i) s(i, 0) = -3.0 + 6.0 * i / 999.0;
  const Vector zeta = (Vector(1) << 1.0).finished();
  CHECK(directional_tail(s, zeta, -4.0).p_hat == doctest::Approx(1.0));
  CHECK(directional_tail(s, zeta, 4.0).p_hat == doctest::Approx(0.0));

  RandomStream rng(8, 0);
  const SampleSet g = sample_gaussian(SpdMatrix(Matrix::Identity(1, 1)), 100000, rng);
  const TailEstimate t = directional_tail(g, zeta, 0.0);
  CHECK(t.ci_lo <= 0.5);
  CHECK(t.ci_hi >= 0.5);
}

TEST_CASE("normal ccdf against quadrature") {
  for (double x : {-2.0, -0.5, 0.0, 0.5, 1.0, 2.5, 5.0}) {
    const double q = x >= 0 ? ccdf_quadrature(x) : 1.0 - ccdf_quadrature(-x);
    CHECK(std::abs(normal_ccdf(x) - q) <= 1e-12);
  }
}
