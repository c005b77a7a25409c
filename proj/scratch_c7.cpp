#include <cstdio>

#include "douglab/experiment.hpp"
#include "douglab/verify.hpp"

using namespace douglab;

int main(int argc, char** argv) {
  const double alpha = argc > 1 ? std::atof(argv[1]) : 20.0;
  const long long K = argc > 2 ? std::atoll(argv[2]) : 45;
  const int kind = argc > 3 ? std::atoi(argv[3]) : 1;  // 0 gaussian, 1 exp
  const int S = argc > 4 ? std::atoi(argv[4]) : 6;

  ExperimentConfig c{
      .seed = 1000,
      .process = Process::kDoug,
      .replicas = 10000,
      .horizon = 100000,
      .checkpoint_factor = 1.4142135623730951,
      .checkpoint_list = {},
      .schedule = StepSchedule(alpha, K, 1.0),
      .x0 = Vector::Zero(1),
      .problem = scalar_linear_problem(
          -1.0, kind ? AdditiveKind::kCenteredExponential : AdditiveKind::kGaussian,
          1.0),
      .w1 = {W1Method::kExact1d, 100000, 256, 0},
      .stein_c2 = 2.0,
      .rate_window = RateWindow{1000, 100000},
      .tails = std::nullopt,
      .output_dir = "/tmp/x",
      .threads = 2};

  std::vector<W1Row> acc;
  const SpdMatrix sigma = target_sigma(c);
  for (int s = 0; s < S; ++s) {
    c.seed = 1000 + 7919ULL * s;
    const TrajectoryBatch b = run_batch(c);
    const auto rows = w1_pipeline(c, b, Series::kZ, sigma);
    if (acc.empty()) acc = rows;
    else
      for (std::size_t i = 0; i < rows.size(); ++i) {
        acc[i].w1 += rows[i].w1;
        acc[i].bias_floor += rows[i].bias_floor;
      }
  }
  for (auto& r : acc) {
    r.w1 /= S;
    r.bias_floor /= S;
  }
  // the floor is the same law at the same sizes for every checkpoint: pool it
  double pooled = 0;
  for (const auto& r : acc) pooled += r.bias_floor;
  pooled /= static_cast<double>(acc.size());
  for (auto& r : acc) r.bias_floor = pooled;
  for (const auto& r : acc)
    if (r.k >= 500)
      std::printf("k=%6lld w1=%.5f floor=%.5f excess=%.5f\n", r.k, r.w1,
                  r.bias_floor, r.w1 - r.bias_floor);
  try {
    const RateFit f = fit_rate(acc, K, c.rate_window);
    std::printf("slope %.4f +- %.4f  (n=%d, r2=%.3f)\n", f.slope, f.slope_stderr,
                f.n_used, f.r2);
  } catch (const std::exception& e) {
    std::printf("fit failed: %s\n", e.what());
  }
  return 0;
}
