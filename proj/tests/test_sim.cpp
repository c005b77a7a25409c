#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "douglab/sim.hpp"
#include "douglab/verify.hpp"

using namespace douglab;

TEST_CASE("checkpoint plans") {
  const CheckpointPlan p = CheckpointPlan::geometric(1, 16);
  CHECK(p.indices == std::vector<long long>{1, 2, 4, 8, 16});
  CHECK_THROWS_AS(CheckpointPlan::explicit_list({3, 3}), ConfigError);
  CHECK_THROWS_AS(CheckpointPlan::explicit_list({}), ConfigError);
}

TEST_CASE("deterministic contraction without noise") {
  Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
  p.noise.additive_scale = 0.0;
  const StepSchedule s(0.5, 1, 0.0);
  const CheckpointPlan plan = CheckpointPlan::explicit_list({0, 1, 2, 3, 8});
  RandomStream rng(1, 0);
  const Matrix y = run_sa(p, s, (Vector(1) << 1.0).finished(), plan, rng);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const double xk = std::pow(0.5, static_cast<double>(plan.indices[i]));
    CHECK(y(i, 0) * std::sqrt(0.5) == doctest::Approx(xk).epsilon(1e-15));
  }

  RandomStream rng2(1, 0);
  const Matrix y0 = run_sa(p, s, Vector::Zero(1), plan, rng2);
  CHECK(y0.norm() == 0.0);
}

TEST_CASE("doug with silenced noise stays at zero") {
  Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
  p.noise.additive_scale = 0.0;
  RandomStream rng(1, 0);
  const Matrix z = run_doug(p.op.jacobian, StepSchedule(0.1, 1, 0.0), p.noise,
                            CheckpointPlan::explicit_list({0, 4, 64}), rng);
  CHECK(z.norm() == 0.0);
}

TEST_CASE("stationary variance of the rescaled SA iterate") {
  // scalar J=-1, xi=0, alpha=0.1: Var(y_k) -> 1/(2 - alpha)
  Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
  const StepSchedule s(0.1, 1, 0.0);
  SimSpec spec{Process::kSa, p, s, Vector::Zero(1),
               CheckpointPlan::explicit_list({500})};
  const TrajectoryBatch b = monte_carlo(spec, 10000, 123, 2);
  const double var = batch_cov(b, b.y, 0)(0, 0);
  const double target = 1.0 / 1.9;
  const double mc_err = 4.0 * target * std::sqrt(2.0 / 10000.0);
  CHECK(std::abs(var - target) <= mc_err);

  // batch mean of y near zero at large k
  const double mean = batch_mean(b, b.y, 0)(0);
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(target / 10000.0));
}

TEST_CASE("doug stationary variance matches the geometric sum") {
  Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
  SimSpec spec{Process::kDoug, p, StepSchedule(0.1, 1, 0.0), Vector::Zero(1),
               CheckpointPlan::explicit_list({400})};
  const TrajectoryBatch b = monte_carlo(spec, 10000, 9, 2);
  const double var = batch_cov(b, b.z, 0)(0, 0);
  CHECK(std::abs(var - 1.0 / 1.9) <= 4.0 * (1.0 / 1.9) * std::sqrt(2.0 / 10000.0));
}

TEST_CASE("running mean equals the averaged draws") {
  // alpha_k = 1/(k+1): x_k is exactly the mean of b_0..b_{k-1}
  Problem p = scalar_linear_problem(-1.0, AdditiveKind::kCenteredExponential, 1.0);
  const StepSchedule s(1.0, 1, 1.0);
  const CheckpointPlan plan = CheckpointPlan::explicit_list({3, 7});
  RandomStream rng(5, 0);
  const Matrix y = run_averaging(p.noise, s, Vector::Zero(1), plan, rng);
  // replay the same stream to recover the b draws
  RandomStream replay(5, 0);
  double sum = 0;
  std::vector<double> means;
  for (int k = 0; k < 8; ++k) {
    if (k == 3 || k == 7) means.push_back(sum / k);
    sum += sample_additive(p.noise, replay)(0);
  }
  CHECK(y(0, 0) == doctest::Approx(means[0] * std::sqrt(4.0)).epsilon(1e-12));
  CHECK(y(1, 0) == doctest::Approx(means[1] * std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("coupled run with zero multiplicative scale collapses") {
  Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0,
                                    MultiplicativeKind::kScalarGaussian, 0.0);
  SimSpec spec{Process::kCoupled, p, StepSchedule(0.1, 1, 0.0),
               (Vector(1) << 1.0).finished(), CheckpointPlan::geometric(1, 128)};
  const TrajectoryBatch b = monte_carlo(spec, 100, 3, 1);
  CHECK(b.z == b.zhat);
  // with xi = 0, linear F, same J: y - z is the deterministic transient
  for (long long r = 0; r < b.replicas; ++r)
    for (std::size_t cp = 0; cp < b.checkpoints.size(); ++cp) {
      const double k = static_cast<double>(b.checkpoints.indices[cp]);
      const double transient =
          std::pow(0.9, k) * 1.0 / std::sqrt(0.1);  // (1+alpha J)^k y_0
      CHECK(std::abs(b.row(b.y, r, cp)[0] - b.row(b.z, r, cp)[0] - transient) <=
            1e-9 * (1.0 + std::abs(transient)));
    }
}

TEST_CASE("monte carlo replica determinism and divergence accounting") {
  Problem p = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0);
  SimSpec spec{Process::kSa, p, StepSchedule(0.2, 1, 0.0),
               (Vector(1) << 1.0).finished(), CheckpointPlan::geometric(1, 64)};
  const TrajectoryBatch one = monte_carlo(spec, 1, 99, 1);
  RandomStream rng(99, 0);
  const Matrix direct = run_sa(p, spec.schedule, spec.x0, spec.plan, rng);
  for (std::size_t cp = 0; cp < spec.plan.size(); ++cp)
    CHECK(one.row(one.y, 0, cp)[0] == direct(cp, 0));

  // wild multiplicative noise at alpha = 1 blows past the guard
  Problem wild = scalar_linear_problem(-1.0, AdditiveKind::kGaussian, 1.0,
                                       MultiplicativeKind::kScalarGaussian, 40.0);
  SimSpec bad{Process::kSa, wild, StepSchedule(1.0, 1, 0.0),
              (Vector(1) << 1.0).finished(), CheckpointPlan::geometric(1, 512)};
  CHECK_THROWS_AS(monte_carlo(bad, 50, 7, 1), TooManyDiverged);
}

TEST_CASE("batch binary round trip") {
  Problem p = scalar_linear_problem(-1.0, AdditiveKind::kUniformCube, 1.0,
                                    MultiplicativeKind::kScalarRademacher, 0.1);
  SimSpec spec{Process::kCoupled, p, StepSchedule(0.1, 1, 0.0),
               (Vector(1) << 1.0).finished(), CheckpointPlan::geometric(1, 32)};
  const TrajectoryBatch b = monte_carlo(spec, 20, 11, 1);
  const auto path = std::filesystem::temp_directory_path() / "douglab_batch_rt.bin";
  write_batch(b, path.string());
  const TrajectoryBatch r = read_batch(path.string());
  CHECK(r.y == b.y);
  CHECK(r.zhat == b.zhat);
  CHECK(r.z == b.z);
  CHECK(r.checkpoints.indices == b.checkpoints.indices);
  CHECK(r.dim == b.dim);
  CHECK(r.replicas == b.replicas);
  std::filesystem::remove(path);
}
