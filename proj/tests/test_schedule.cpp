#include <cmath>

#include "doctest.h"
#include "douglab/bounds.hpp"
#include "douglab/schedule.hpp"
#include "douglab/verify.hpp"

using namespace douglab;

TEST_CASE("step values") {
  CHECK(StepSchedule(0.1, 1, 0.0).step(7) == doctest::Approx(0.1));
  CHECK(StepSchedule(1.0, 4, 1.0).step(0) == doctest::Approx(0.25));
  CHECK(StepSchedule(1.0, 100, 0.5).step(0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(StepSchedule(10.0, 1, 0.0), ConfigError);  // alpha_0 > 1
}

TEST_CASE("drift matrices") {
  const Matrix j = (Matrix(2, 2) << -1.0, 0.5, 0.0, -2.0).finished();
  CHECK((drift_matrix(StepSchedule(0.5, 1, 0.0), 3, j) - j).norm() == 0.0);

  const StepSchedule s1(2.0, 4, 1.0);
  for (long long k : {0LL, 5LL, 1000LL})
    CHECK((drift_matrix(s1, k, j) - (j + 0.25 * Matrix::Identity(2, 2))).norm() <=
          1e-15);

  const StepSchedule smid(1.0, 4, 0.5);
  CHECK((drift_matrix(smid, 0, j) - (j + 0.125 * Matrix::Identity(2, 2))).norm() <=
        1e-15);
}

TEST_CASE("limit_drift") {
  const Matrix j = (Matrix(1, 1) << -1.0).finished();
  CHECK((limit_drift(StepSchedule(0.5, 1, 0.0), j) - j).norm() == 0.0);
  CHECK(limit_drift(StepSchedule(4.0, 8, 1.0), j)(0, 0) ==
        doctest::Approx(-7.0 / 8.0));
  CHECK_THROWS_AS(limit_drift(StepSchedule(0.4, 1, 1.0), j), NotHurwitzAfterShift);
}

TEST_CASE("validate and find_min_K") {
  const Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
  const ProblemConstants pc = problem_constants(p);
  const StepSchedule s(5.0, 64, 1.0);
  const SpectralConstants sc =
      spectral_constants(p.op.jacobian, p.noise.sigma_b, s, pc.gamma);
  CHECK(sc.iota_V == doctest::Approx(0.5));

  // iota_V alpha = 2.5 > 2: with K large all xi=1 entries hold
  const AdmissibilityReport rep = validate_schedule(s, pc, sc);
  CHECK(rep.all_satisfied());
  CHECK(rep.find("xi1.iota_v_alpha_gt_2") != nullptr);
  CHECK(rep.find("xi1.iota_v_alpha_gt_2")->actual == doctest::Approx(2.5));

  // typical constants at K = 1, xi = 0.5: large-K entries fail
  const StepSchedule bad(0.5, 1, 0.5);
  const SpectralConstants sc0 =
      spectral_constants(p.op.jacobian, p.noise.sigma_b, bad, pc.gamma);
  const AdmissibilityReport rep_bad = validate_schedule(bad, pc, sc0);
  CHECK_FALSE(rep_bad.all_satisfied());

  // scan property: the returned K satisfies, K-1 does not
  const auto kmin = find_min_K(5.0, 1.0, pc, sc, 100000);
  REQUIRE(kmin.has_value());
  CHECK(validate_schedule(StepSchedule(5.0, *kmin, 1.0), pc, sc).all_satisfied());
  if (*kmin > 5)  // K-1 must keep alpha_0 <= 1 for the schedule to exist
    CHECK_FALSE(
        validate_schedule(StepSchedule(5.0, *kmin - 1, 1.0), pc, sc).all_satisfied());

  // K-independent failure at xi = 1: iota_V alpha <= 2 can never be repaired
  const StepSchedule weak(3.0, 8, 1.0);
  const SpectralConstants sc3 =
      spectral_constants(p.op.jacobian, p.noise.sigma_b, weak, pc.gamma);
  CHECK_FALSE(find_min_K(3.0, 1.0, pc, sc3, 20000).has_value());
}

TEST_CASE("drift matrix approaches its limit") {
  const Matrix j = (Matrix(2, 2) << -1.0, 0.3, -0.2, -0.9).finished();
  // the shift decays like xi/(2 alpha (k+K)^{1-xi}); at k = 1e6 it clears the
  // 1e-6 target once xi is small enough for the exponent to bite
  const StepSchedule s(0.5, 4, 0.1);
  CHECK((drift_matrix(s, 1'000'000, j) - limit_drift(s, j)).cwiseAbs().maxCoeff() <=
        1e-6);
  // and the gap shrinks monotonically for any xi < 1
  const StepSchedule s2(0.5, 4, 0.6);
  double prev = 1e300;
  for (long long k : {10LL, 1000LL, 100000LL, 10000000LL}) {
    const double gap =
        (drift_matrix(s2, k, j) - limit_drift(s2, j)).cwiseAbs().maxCoeff();
    CHECK(gap < prev);
    prev = gap;
  }
}
