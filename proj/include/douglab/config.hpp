#pragma once

#include <optional>
#include <string>
#include <vector>

#include "douglab/model.hpp"
#include "douglab/schedule.hpp"
#include "douglab/sim.hpp"
#include "douglab/transport.hpp"

namespace douglab {

struct W1Config {
  W1Method method = W1Method::kExact1d;
  long long n_target = 100'000;
  int n_projections = 256;
  int bootstrap = 200;
};

struct TailsConfig {
  std::vector<double> a_grid;
  Vector zeta;
  long long checkpoint = -1;  // index into the plan; -1 means last
};

struct RateWindow {
  long long k_lo = 0;
  long long k_hi = 0;
};

// Everything an experiment run needs; parsed from JSON against the schema in
// schemas/experiment_config.schema.json (unknown keys rejected).
struct ExperimentConfig {
  std::uint64_t seed = 1;
  Process process = Process::kSa;
  long long replicas = 1;
  long long horizon = 1;
  double checkpoint_factor = 2.0;
  std::vector<long long> checkpoint_list;  // overrides the factor when nonempty
  StepSchedule schedule;
  Vector x0;
  Problem problem;
  W1Config w1;
  double stein_c2 = 2.0;
  std::optional<RateWindow> rate_window;
  std::optional<TailsConfig> tails;
  std::string output_dir = "out";
  int threads = 0;  // 0: DOUG_LAB_THREADS env, else hardware

  CheckpointPlan plan() const;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
// Canonical emission: fixed key order, shortest round-trip floats; satisfies
// emit(parse(emit(c))) == emit(c) byte for byte.
std::string emit_config(const ExperimentConfig& c);

int resolve_threads(int configured);

}  // namespace douglab
