#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "douglab/bounds.hpp"
#include "douglab/config.hpp"
#include "douglab/experiment.hpp"
#include "douglab/verify.hpp"

using namespace douglab;

namespace {

const char* kDemo = R"({
  "seed": 9,
  "process": "sa",
  "replicas": 200,
  "horizon": 32,
  "schedule": {"alpha": 0.5, "K": 1, "xi": 0.0},
  "x0": [1.0],
  "problem": {
    "operator": {"kind": "linear", "jacobian": [[-1.0]], "x_star": [0.0]},
    "noise": {"additive": "gaussian", "sigma_b": [[1.0]],
              "multiplicative": "none", "multiplicative_scale": 0.0,
              "additive_scale": 0.0},
    "certificate": {"P": [[0.5]], "gamma": 1.0, "L_s": 1.0, "u_2s": 1.0}
  },
  "w1": {"method": "exact_1d", "n_target": 500, "bootstrap": 8},
  "output_dir": "out",
  "threads": 1
})";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config round trip is byte identical") {
  const ExperimentConfig c = parse_config_text(kDemo);
  const std::string once = emit_config(c);
  CHECK(once == emit_config(parse_config_text(once)));
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config_text(R"({"horizon": 2, "whatever": 1})"), ConfigError);
  std::string tweaked = kDemo;
  tweaked.replace(tweaked.find("\"alpha\""), 7, "\"alpha_bad\"");
  CHECK_THROWS_AS(parse_config_text(tweaked), ConfigError);
}

TEST_CASE("noiseless linear run writes the exact MSE decay column") {
  ExperimentConfig c = parse_config_text(kDemo);
  const auto dir = std::filesystem::temp_directory_path() / "douglab_test_sim";
  std::filesystem::remove_all(dir);
  CHECK(cmd_simulate(c, dir.string()) == 0);
  std::ifstream f(dir / "summary.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header.rfind("k,alpha_k,mse", 0) == 0);
  std::string line;
  while (std::getline(f, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    const long long k = std::stoll(tok);
    std::getline(ss, tok, ',');
    std::getline(ss, tok, ',');
    const double mse = std::stod(tok);
    CHECK(mse == doctest::Approx(std::pow(0.25, static_cast<double>(k)))
                     .epsilon(1e-12));
  }
  // same seed, same bytes
  CHECK(cmd_simulate(c, (dir / "again").string()) == 0);
  CHECK(slurp(dir / "summary.csv") == slurp(dir / "again" / "summary.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("rate fit on synthetic columns") {
  auto make_rows = [](auto fn) {
    std::vector<W1Row> rows;
    for (long long k = 1000; k <= 1024000; k *= 2) {
      W1Row r;
      r.k = k;
      r.alpha_k = 1.0 / k;
      r.w1 = fn(static_cast<double>(k + 1));  // fit regresses on log(k + K), K = 1
      r.bias_floor = 0.0;
      rows.push_back(r);
    }
    return rows;
  };
  SUBCASE("exact power law") {
    const auto rows = make_rows([](double k) { return 3.0 / std::sqrt(k); });
    const RateFit f = fit_rate(rows, 1, RateWindow{1000, 1024000});
    CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("log-corrected law lands between -0.5 and -0.35") {
    const auto rows = make_rows([](double k) { return std::log(k) / std::sqrt(k); });
    const RateFit f = fit_rate(rows, 1, RateWindow{1000, 1024000});
    CHECK(f.slope > -0.5);
    CHECK(f.slope < -0.35);
  }
  SUBCASE("constant column is flat") {
    const auto rows = make_rows([](double) { return 0.7; });
    const RateFit f = fit_rate(rows, 1, RateWindow{1000, 1024000});
    CHECK(std::abs(f.slope) <= 1e-9);
  }
  SUBCASE("too few usable points") {
    auto rows = make_rows([](double k) { return 1.0 / k; });
    rows.resize(4);
    CHECK_THROWS_AS(fit_rate(rows, 1, RateWindow{1000, 1024000}), InsufficientData);
  }
}

TEST_CASE("verify registry covers every spec property") {
  const std::vector<std::string> expected = {
      "linalg.lyapunov_roundtrip",
      "linalg.hurwitz_charpoly",
      "linalg.vnorm_euclidean",
      "linalg.voperator_submultiplicative",
      "linalg.spd_sqrt_roundtrip",
      "schedule.stepsize_properties",
      "schedule.drift_limit_convergence",
      "model.residual_envelope",
      "model.lipschitz",
      "model.multiplicative_martingale",
      "model.sgd_negative_drift",
      "model.noise_mean_cov",
      "sim.determinism",
      "sim.coupling_consistency",
      "sim.mse_envelope",
      "sim.doug_covariance_oracle",
      "bounds.mse_dominance",
      "bounds.coupling_dominance",
      "bounds.theta_dominance",
      "bounds.recsol_dominance",
      "bounds.contraction_grid",
      "bounds.spectral_consistency",
      "bounds.bound_monotonicity",
      "transport.metric_axioms",
      "transport.calibration_gaussian",
      "transport.matching_bruteforce",
      "transport.sliced_le_exact",
      "cli.config_roundtrip",
      "cli.csv_determinism",
  };
  const auto ids = verify_suite_ids();
  for (const auto& want : expected)
    CHECK(std::find(ids.begin(), ids.end(), want) != ids.end());
  CHECK(ids.size() == expected.size());
}

TEST_CASE("selector narrows the verify run") {
  const auto results = run_verify("transport");
  CHECK(results.size() == 4);
  for (const auto& r : results) {
    CHECK(r.id.rfind("transport.", 0) == 0);
    CHECK(r.pass);
  }
}

TEST_CASE("injected fault is caught by the contraction suite") {
  // mutation check: an eps beyond the admissible interval must throw, so a
  // sign-flipped implementation could not silently pass
  const Matrix j = (Matrix(1, 1) << -1.0).finished();
  const SpdMatrix v((Matrix(1, 1) << 0.5).finished());
  CHECK_THROWS_AS(contraction_check(j, v, 1.5, 0.0), EpsOutOfRange);
  const auto c = contraction_check(j, v, 0.2, 0.0);
  CHECK(c.lhs == doctest::Approx(0.64));
  // a flipped inequality would report holds = false here
  CHECK(c.holds);
}
