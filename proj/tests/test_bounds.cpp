#include <cmath>

#include "doctest.h"
#include "douglab/bounds.hpp"
#include "douglab/transport.hpp"
#include "douglab/verify.hpp"

using namespace douglab;

namespace {

ProblemConstants scalar_pc(double gamma, double vs0, double vs2) {
  ProblemConstants pc;
  pc.gamma = gamma;
  pc.varsigma0 = vs0;
  pc.varsigma2 = vs2;
  pc.alpha0_cap = 1.0;
  pc.delta = 1.0;
  return pc;
}

}  // namespace

TEST_CASE("spectral constants, scalar closed forms") {
  const Matrix j = (Matrix(1, 1) << -1.0).finished();
  const SpdMatrix sb((Matrix(1, 1) << 1.0).finished());
  const SpectralConstants sc = spectral_constants(j, sb, StepSchedule(4.0, 8, 1.0), 1.0);
  CHECK(sc.V.mat()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sc.iota_V == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sc.Sigma1.mat()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(sc.Sigma2.has_value());
  CHECK(sc.Sigma2->mat()(0, 0) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(sc.eta == doctest::Approx(0.25));  // min(iota/2, 3 gamma/4)
}

TEST_CASE("mse bound cases") {
  const ProblemConstants pc = scalar_pc(1.0, 1.0, 2.0);
  SUBCASE("k = 0 keeps the transient whole") {
    const FlaggedValue v = mse_bound(0, StepSchedule(0.1, 1, 0.0), pc, 1.0);
    CHECK(v.value == doctest::Approx(1.0 + 2.0 * 0.1 / 1.5));
    CHECK(v.value >= 1.0);
  }
  SUBCASE("frozen xi = 0 value at k = 100") {
    const FlaggedValue v = mse_bound(100, StepSchedule(0.1, 1, 0.0), pc, 1.0);
    CHECK(v.value ==
          doctest::Approx(std::exp(-15.0) + 0.2 / 1.5).epsilon(1e-12));
  }
  SUBCASE("xi = 1 structure") {
    const StepSchedule s(2.0, 4, 1.0);
    const long long k = 36;
    const FlaggedValue v = mse_bound(k, s, pc, 1.0);
    const double p = 1.5 * 1.0 * 2.0;
    const double expect = std::pow(4.0 / (k + 4.0), p) +
                          2.0 * 2.0 * s.step(k) / (p - 1.0);
    CHECK(v.value == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("coupling bound") {
  const Problem p = scalar_linear_problem(-0.5, AdditiveKind::kGaussian, 1.0,
                                          MultiplicativeKind::kScalarRademacher, 0.2);
  const ProblemConstants pc = problem_constants(p);
  const StepSchedule s(0.2, 1, 0.0);
  const SpectralConstants sc =
      spectral_constants(p.op.jacobian, p.noise.sigma_b, s, pc.gamma);

  SUBCASE("A1 = 0 kills the bound") {
    ProblemConstants pc0 = pc;
    pc0.A1 = 0.0;
    CHECK(coupling_bound(50, s, sc, pc0, 4.0).value == 0.0);
  }
  SUBCASE("k = 0 leaves only the steady term") {
    const FlaggedValue v = coupling_bound(0, s, sc, pc, 4.0);
    const double th2 = 2.0 * pc.A1 * pc.varsigma2 * sc.lambda_max * sc.lambda_max / 3.0;
    CHECK(v.value ==
          doctest::Approx(th2 * 0.2 / (sc.iota_V * pc.gamma)).epsilon(1e-12));
  }
}

TEST_CASE("doug bound report shape") {
  const Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
  const ProblemConstants pc = problem_constants(p);
  const SteinConstants st = stein_constants(1, 2.0);

  SUBCASE("k = 0, xi = 0: transient term is exactly phi_11") {
    const StepSchedule s(0.01, 1, 0.0);
    const SpectralConstants sc =
        spectral_constants(p.op.jacobian, p.noise.sigma_b, s, pc.gamma);
    const BoundReport r = doug_w1_bound(0, s, sc, pc, st);
    const double phi10 = st.C2 * std::sqrt(sc.lambda_max / sc.lambda_min) *
                         sc.sigma_max_1 * sc.norm_J_2;
    const double phi11 = phi10 * sc.norm_Sigma1_V;  // times d = 1
    CHECK(r.term("stein_transient") == doctest::Approx(phi11).epsilon(1e-12));
    CHECK(r.hypotheses_ok);
    CHECK(r.case_tag == BoundCase::kXi0);
    // beta instantiation is explicit: alpha = 0.01 < e^-2
    CHECK(r.beta_used == doctest::Approx(1.0 + 2.0 / std::log(0.01)));
  }
  SUBCASE("doubling k+K at xi = 1 halves the log-free middle term") {
    const StepSchedule s(5.0, 64, 1.0);
    const SpectralConstants sc =
        spectral_constants(p.op.jacobian, p.noise.sigma_b, s, pc.gamma);
    const BoundReport r1 = doug_w1_bound(64, s, sc, pc, st);    // k+K = 128
    const BoundReport r2 = doug_w1_bound(192, s, sc, pc, st);   // k+K = 256
    CHECK(r2.term("stein_mid") ==
          doctest::Approx(0.5 * r1.term("stein_mid")).epsilon(1e-12));
    CHECK(r1.case_tag == BoundCase::kXi1A);
  }
}

TEST_CASE("sa bound reductions and shapes") {
  const SteinConstants st = stein_constants(1, 2.0);

  SUBCASE("linear problem without multiplicative noise drops the rho/theta terms") {
    const Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
    const ProblemConstants pc = problem_constants(p);
    const StepSchedule s(0.05, 1, 0.0);
    const SpectralConstants sc =
        spectral_constants(p.op.jacobian, p.noise.sigma_b, s, pc.gamma);
    const BoundReport sa = sa_w1_bound(100, s, sc, pc, st, 1.0, 1.0);
    CHECK(sa.term("resid_steady") == 0.0);
    CHECK(sa.term("resid_transient") == 0.0);
    CHECK(sa.term("coupling_steady") == 0.0);
    CHECK(sa.term("coupling_transient") == 0.0);
    const BoundReport dg = doug_w1_bound(100, s, sc, pc, st);
    CHECK(sa.term("stein_dominant") ==
          doctest::Approx(dg.term("stein_dominant")).epsilon(1e-12));
    CHECK(sa.term("stein_mid") == doctest::Approx(dg.term("stein_mid")).epsilon(1e-12));
    const double expect_transient =
        (1.0 * st.C2 * std::sqrt(sc.lambda_max / sc.lambda_min) * sc.sigma_max_1 *
             sc.norm_J_2 * sc.norm_Sigma1_V +
         sc.lambda_max / 0.05 * 1.0) *
        std::exp(-0.5 * sc.iota_V * 0.05 * 100);
    CHECK(sa.term("transient_init") == doctest::Approx(expect_transient).epsilon(1e-12));
  }

  SUBCASE("delta steers the dominant exponent at xi = 1") {
    const Problem pa = saturating_problem(-1.0, 0.3, 1.0, 1.0, AdditiveKind::kGaussian);
    const Problem pb = saturating_problem(-1.0, 0.3, 0.5, 1.0, AdditiveKind::kGaussian);
    for (const Problem* p : {&pa, &pb}) {
      const ProblemConstants pc = problem_constants(*p);
      const StepSchedule s(9.0, 128, 1.0);
      const SpectralConstants sc =
          spectral_constants(p->op.jacobian, p->noise.sigma_b, s, pc.gamma);
      const BoundReport r1 = sa_w1_bound(128, s, sc, pc, st, 1.0, 1.0);   // k+K=256
      const BoundReport r2 = sa_w1_bound(896, s, sc, pc, st, 1.0, 1.0);   // k+K=1024
      const double ratio = r2.term("resid_steady") / r1.term("resid_steady");
      CHECK(ratio == doctest::Approx(std::pow(0.25, 0.5 * pc.delta)).epsilon(1e-10));
    }
  }

  SUBCASE("terms decrease along k for an admissible xi = 1 instance") {
    const Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0,
                                            MultiplicativeKind::kScalarRademacher, 0.2);
    const ProblemConstants pc = problem_constants(p);
    const StepSchedule s(9.0, 64, 1.0);
    const SpectralConstants sc =
        spectral_constants(p.op.jacobian, p.noise.sigma_b, s, pc.gamma);
    BoundReport prev = sa_w1_bound(100, s, sc, pc, st, 1.0, 1.0);
    for (long long k : {1000LL, 10000LL}) {
      const BoundReport cur = sa_w1_bound(k, s, sc, pc, st, 1.0, 1.0);
      for (std::size_t t = 0; t < cur.terms.size(); ++t)
        CHECK(cur.terms[t].value <= prev.terms[t].value * (1.0 + 1e-12));
      prev = cur;
    }
  }

  SUBCASE("term labels follow the displayed order") {
    const Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
    const ProblemConstants pc = problem_constants(p);
    const StepSchedule s(9.0, 64, 1.0);
    const SpectralConstants sc =
        spectral_constants(p.op.jacobian, p.noise.sigma_b, s, pc.gamma);
    const BoundReport r = sa_w1_bound(10, s, sc, pc, st, 1.0, 1.0);
    const std::vector<std::string> want = {
        "resid_steady",   "stein_dominant", "coupling_steady",   "stein_mid",
        "transient_init", "resid_transient", "coupling_transient"};
    REQUIRE(r.terms.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(r.terms[i].label == want[i]);
    double total = 0;
    for (const auto& t : r.terms) total += t.value;
    CHECK(r.total == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("tail sandwich") {
  const SpdMatrix sigma(Matrix::Identity(1, 1));
  const Vector zeta = (Vector(1) << 1.0).finished();

  SUBCASE("w1 = 0 collapses to the Gaussian tail") {
    const TailSandwich t = tail_sandwich(1.3, zeta, 0.0, sigma);
    CHECK(t.width == 0.0);
    CHECK(t.lower == doctest::Approx(normal_ccdf(1.3)));
    CHECK(t.upper == doctest::Approx(normal_ccdf(1.3)));
  }
  SUBCASE("both sides vanish as a grows") {
    double prev = 1.0;
    for (double a : {5.0, 50.0, 500.0, 5000.0}) {
      const TailSandwich t = tail_sandwich(a, zeta, 0.01, sigma);
      CHECK(t.upper < prev);
      CHECK(t.lower >= 0.0);
      prev = t.upper;
    }
    CHECK(prev <= 3e-5);  // the sandwich tail decays like w1/((1-rho) a)
  }
  SUBCASE("frozen width at w1 = 0.01, a = 1") {
    const TailSandwich t = tail_sandwich(1.0, zeta, 0.01, sigma);
    CHECK(t.rho == doctest::Approx(0.9));
    const double half = 0.1 * normal_pdf(0.9) + 0.01 / 0.1;
    CHECK(t.upper - t.lower == doctest::Approx(2.0 * half).epsilon(1e-12));
    CHECK(t.hypothesis_ok);
  }
  SUBCASE("invalid rho") {
    CHECK_THROWS_AS(tail_sandwich(1.0, zeta, 1.2, sigma), InvalidRho);
  }
}

TEST_CASE("mean error bound") {
  const Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
  const ProblemConstants pc = problem_constants(p);
  const StepSchedule s(5.0, 64, 1.0);
  const SpectralConstants sc =
      spectral_constants(p.op.jacobian, p.noise.sigma_b, s, pc.gamma);
  const SteinConstants st = stein_constants(1, 2.0);
  const MeanErrorBound m = mean_error_bound(100, s, sc, pc, st, 1.0, 1.0);
  const double sigma2 = sc.Sigma2->mat()(0, 0);
  CHECK(std::abs(m.e_norm - std::sqrt(sigma2) * std::sqrt(2.0 / M_PI)) <=
        4.0 * m.e_norm_stderr);

  // leading term halves when k + K quadruples
  const MeanErrorBound m4 = mean_error_bound(4 * (100 + 64) - 64, s, sc, pc, st, 1.0, 1.0);
  CHECK(m4.leading == doctest::Approx(0.5 * m.leading).epsilon(1e-9));

  // d = 2, Sigma2 = I would give E||Z|| = sqrt(pi/2)
  const Problem p2 = dense_spd_problem(2, AdditiveKind::kGaussian);
  const ProblemConstants pc2 = problem_constants(p2);
  const StepSchedule s2(9.0, 64, 1.0);
  SpectralConstants sc2 =
      spectral_constants(p2.op.jacobian, p2.noise.sigma_b, s2, pc2.gamma);
  sc2.Sigma2 = SpdMatrix(Matrix::Identity(2, 2));
  const MeanErrorBound m2 = mean_error_bound(50, s2, sc2, pc2, st, 1.0, 1.0);
  CHECK(std::abs(m2.e_norm - std::sqrt(M_PI / 2.0)) <= 4.0 * m2.e_norm_stderr);
}

TEST_CASE("recursion lemma closed forms") {
  SUBCASE("pure contraction, xi = 0") {
    const FlaggedValue v =
        rec_sol_closed_form(1.0, 1.0, 0.0, 0.0, 0.5, 1.0, StepSchedule(0.1, 1, 0.0), 10);
    CHECK(v.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
  SUBCASE("steady term alone is k-independent") {
    const StepSchedule s(0.2, 1, 0.0);
    const FlaggedValue a = rec_sol_closed_form(0.0, 0.8, 0.0, 1.5, 0.5, 0.7, s, 5);
    const FlaggedValue b = rec_sol_closed_form(0.0, 0.8, 0.0, 1.5, 0.5, 0.7, s, 5000);
    CHECK(a.value == doctest::Approx(1.5 * std::pow(0.2, 0.7) / 0.8));
    CHECK(a.value == doctest::Approx(b.value));
  }
  SUBCASE("xi = 1 resonance carries the log factor") {
    const StepSchedule s(2.0, 4, 1.0);
    const double mu1 = 0.4;           // mu1 alpha = 0.8
    const double rho2 = 0.8;          // equal: case 3(c)
    const FlaggedValue v = rec_sol_closed_form(0.0, mu1, 0.0, 1.0, 0.0, rho2, s, 60);
    const double expect = std::pow(2.0, 1.8) * 2.0 * std::log(64.0) *
                          std::pow(s.step(60), 0.8);
    CHECK(v.value == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("theta products, small cases") {
  const Matrix j = (Matrix(1, 1) << -1.0).finished();
  const SpdMatrix sb((Matrix(1, 1) << 1.0).finished());
  const StepSchedule s(0.1, 1, 0.0);
  const SpectralConstants sc = spectral_constants(j, sb, s, 1.0);

  const auto rows = theta_products(j, s, {1, 2000}, 0.5, sb, sc);
  // k = 1: single weight Theta_0 = sqrt(alpha) I
  CHECK(rows[0].sum_exact == doctest::Approx(std::pow(0.1, 1.25)).epsilon(1e-12));
  CHECK(rows[0].gap_exact == doctest::Approx(std::abs(0.1 - 0.5)).epsilon(1e-12));
  // large k: covariance settles at 1/(2 - alpha), gap |1/(2-a) - 1/2|
  CHECK(rows[1].gap_exact ==
        doctest::Approx(1.0 / 1.9 - 0.5).epsilon(1e-9));
  for (const auto& r : rows) {
    CHECK(r.sum_exact <= r.sum_bound);
    CHECK(r.gap_exact <= r.gap_bound);
  }
}

TEST_CASE("contraction checks") {
  const Matrix j = (Matrix(1, 1) << -1.0).finished();
  const SpdMatrix v((Matrix(1, 1) << 0.5).finished());
  SUBCASE("eps = 0 is the identity") {
    const auto c = contraction_check(j, v, 0.0, 0.0);
    CHECK(c.lhs == doctest::Approx(1.0));
    CHECK(c.rhs == doctest::Approx(1.0));
    CHECK(c.holds);
  }
  SUBCASE("scalar arithmetic") {
    const auto c = contraction_check(j, v, 0.1, 0.0);
    CHECK(c.lhs == doctest::Approx(0.81).epsilon(1e-12));
    CHECK(c.rhs == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(c.holds);
  }
  SUBCASE("out-of-range eps throws") {
    CHECK_THROWS_AS(contraction_check(j, v, 5.0, 0.0), EpsOutOfRange);
  }
  SUBCASE("symmetric specialization on a diagonal matrix") {
    const Matrix jd = (Matrix(2, 2) << -1.0, 0.0, 0.0, -2.0).finished();
    // Euclidean variant, iota_J = 1, step 0.5: ||I + 0.5 J||^2 = 0.25 <= 0.5
    const auto c0 = contraction_check_symmetric(jd, StepSchedule(0.5, 1, 0.0), 0);
    CHECK(c0.lhs == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(c0.rhs == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c0.holds);
    // xi = 1 variant with the alpha shift
    const StepSchedule s(2.0, 2, 1.0);
    const auto c1 = contraction_check_symmetric(jd, s, 8);
    const double a8 = s.step(8);
    CHECK(c1.lhs == doctest::Approx(std::pow(1.0 - 0.75 * a8, 2.0)).epsilon(1e-12));
    CHECK(c1.rhs == doctest::Approx(1.0 - 1.5 * 0.75 * a8).epsilon(1e-12));
    CHECK(c1.holds);
  }
}

TEST_CASE("clt rate shells") {
  CHECK(clt_rate(100, StepSchedule(0.01, 1, 0.0), 2.0).value ==
        doctest::Approx(2.0 * 0.1 * std::log(100.0)).epsilon(1e-12));
  const FlaggedValue v = clt_rate(6, StepSchedule(1.0, 1, 1.0), 1.0);
  CHECK(v.value == doctest::Approx(std::log(7.0) / std::sqrt(7.0)).epsilon(1e-12));
  CHECK(v.hypotheses_ok);
  CHECK_FALSE(clt_rate(6, StepSchedule(2.0, 2, 1.0), 1.0).hypotheses_ok);  // K < 2a-1
}
