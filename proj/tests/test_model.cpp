#include <cmath>

#include "doctest.h"
#include "douglab/model.hpp"
#include "douglab/verify.hpp"

using namespace douglab;

TEST_CASE("eval_operator") {
  const Operator lin = make_linear_operator(-Matrix::Identity(2, 2),
                                            (Vector(2) << 1.0, 2.0).finished());
  CHECK(eval_operator(lin, lin.x_star).norm() == 0.0);
  const Vector x = lin.x_star + (Vector(2) << 1.0, 2.0).finished();
  CHECK((eval_operator(lin, x) - (Vector(2) << -1.0, -2.0).finished()).norm() <=
        1e-15);

  const Operator sat = make_saturating_operator(
      (Matrix(1, 1) << -1.0).finished(), Vector::Zero(1), 0.1, 1.0, 1.0);
  CHECK(eval_operator(sat, (Vector(1) << 0.5).finished())(0) ==
        doctest::Approx(-0.475).epsilon(1e-12));
}

TEST_CASE("sample_noise structure") {
  NoiseModel nm(SpdMatrix(Matrix::Identity(2, 2)));
  RandomStream rng(2, 0);
  SUBCASE("no multiplicative component") {
    const NoiseDraw d = sample_noise(nm, (Vector(2) << 3.0, 1.0).finished(),
                                     Vector::Zero(2), rng);
    CHECK(d.a_term.norm() == 0.0);
  }
  SUBCASE("at the fixed point") {
    nm.multiplicative_kind = MultiplicativeKind::kScalarGaussian;
    nm.multiplicative_scale = 0.7;
    const Vector xs = (Vector(2) << 1.0, -1.0).finished();
    const NoiseDraw d = sample_noise(nm, xs, xs, rng);
    CHECK(d.a_term.norm() == 0.0);
  }
  SUBCASE("sample covariance near Sigma_b") {
    const long long n = 100000;
    Matrix cov = Matrix::Zero(2, 2);
    for (long long i = 0; i < n; ++i) {
      const Vector b = sample_additive(nm, rng);
      cov += b * b.transpose();
    }
    cov /= static_cast<double>(n);
    CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.02);
  }
}

TEST_CASE("moments closed forms") {
  SUBCASE("gaussian scalar") {
    NoiseModel nm(SpdMatrix((Matrix(1, 1) << 1.0).finished()));
    const NoiseMoments m = moments_of(nm);
    CHECK(m.B1 == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-12));
    CHECK(m.B2 == doctest::Approx(1.0));
    CHECK(m.B3 == doctest::Approx(2.0 * std::sqrt(2.0 / M_PI)).epsilon(1e-12));
    CHECK_FALSE(m.monte_carlo);
  }
  SUBCASE("rademacher scalar: |b| = 1 a.s.") {
    NoiseModel nm(SpdMatrix((Matrix(1, 1) << 1.0).finished()));
    nm.additive_kind = AdditiveKind::kRademacherProduct;
    const NoiseMoments m = moments_of(nm);
    CHECK(m.B1 == doctest::Approx(1.0));
    CHECK(m.B2 == doctest::Approx(1.0));
    CHECK(m.B3 == doctest::Approx(1.0));
  }
  SUBCASE("uniform scalar has unit variance") {
    NoiseModel nm(SpdMatrix((Matrix(1, 1) << 1.0).finished()));
    nm.additive_kind = AdditiveKind::kUniformCube;
    const NoiseMoments m = moments_of(nm);
    CHECK(m.B2 == doctest::Approx(1.0));
    CHECK(m.B1 == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  }
  SUBCASE("centered exponential scalar") {
    NoiseModel nm(SpdMatrix((Matrix(1, 1) << 1.0).finished()));
    nm.additive_kind = AdditiveKind::kCenteredExponential;
    const NoiseMoments m = moments_of(nm);
    CHECK(m.B1 == doctest::Approx(2.0 / M_E).epsilon(1e-12));
    CHECK(m.B3 == doctest::Approx(12.0 / M_E - 2.0).epsilon(1e-12));
  }
  SUBCASE("isotropic gaussian d=3 via chi moments") {
    NoiseModel nm(SpdMatrix(Matrix::Identity(3, 3)));
    const NoiseMoments m = moments_of(nm);
    CHECK(m.B1 == doctest::Approx(1.5957691216057308).epsilon(1e-12));
    CHECK(m.B2 == doctest::Approx(3.0));
    CHECK_FALSE(m.monte_carlo);
    CHECK(m.B_max == doctest::Approx(m.B3));
  }
  SUBCASE("anisotropic non-gaussian falls back to Monte Carlo") {
    NoiseModel nm(SpdMatrix((Matrix(2, 2) << 1.0, 0.3, 0.3, 0.5).finished()));
    nm.additive_kind = AdditiveKind::kCenteredExponential;
    const NoiseMoments m = moments_of(nm);
    CHECK(m.monte_carlo);
    CHECK(m.stderr_B1 > 0);
    CHECK(m.B2 == doctest::Approx(1.5));
  }
}

TEST_CASE("certificate eigen-derived l and u") {
  const LyapunovCertificate cert(
      SpdMatrix((Matrix(2, 2) << 0.5, 0.0, 0.0, 0.25).finished()), 1.0, 1.0);
  CHECK(cert.l == doctest::Approx(2.0));
  CHECK(cert.u == doctest::Approx(4.0));
}

TEST_CASE("logcosh operator wiring") {
  const Operator op = make_logcosh_operator(
      SpdMatrix((Matrix(2, 2) << 1.0, 0.0, 0.0, 2.0).finished()), 0.3);
  CHECK(op.jacobian(0, 0) == doctest::Approx(-1.3));
  CHECK(op.jacobian(1, 1) == doctest::Approx(-2.3));
  CHECK(op.delta == 1.0);
  CHECK(op.R1 == doctest::Approx(0.268 * 0.3));
  // residual stays inside its envelope on a few hand points
  for (double x : {0.1, 0.5, 1.0, 1.6, 3.0, 10.0}) {
    const Vector v = (Vector(2) << x, -x).finished();
    const Vector r = eval_operator(op, v) - op.jacobian * v;
    CHECK(r.norm() <= op.R1 * v.squaredNorm() * (1.0 + 1e-12));
  }
}

TEST_CASE("problem constants composition") {
  const Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0,
                                          MultiplicativeKind::kScalarRademacher, 0.2);
  const ProblemConstants c = problem_constants(p);
  CHECK(c.gamma == doctest::Approx(1.0));
  CHECK(c.l == doctest::Approx(2.0));
  CHECK(c.u == doctest::Approx(2.0));
  CHECK(c.varsigma0 == doctest::Approx(1.0));
  CHECK(c.varsigma2 == doctest::Approx(2.0));  // u * u_2s * L_s * B2
  CHECK(c.A1 == doctest::Approx(0.04));
  CHECK(c.alpha0_cap == doctest::Approx(0.5 / (2.0 * 1.04)));
}
