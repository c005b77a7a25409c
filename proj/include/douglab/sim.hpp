#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "douglab/model.hpp"
#include "douglab/schedule.hpp"

namespace douglab {

// Divergence guard: a replica is flagged once ||x_k - x*|| exceeds this.
inline constexpr double kDivergenceGuard = 1e12;

struct CheckpointPlan {
  std::vector<long long> indices;  // strictly increasing, last = horizon

  static CheckpointPlan geometric(long long K, long long horizon,
                                  double factor = 2.0);
  static CheckpointPlan explicit_list(std::vector<long long> ks);

  long long horizon() const { return indices.back(); }
  std::size_t size() const { return indices.size(); }
};

enum class Process { kSa, kCoupled, kDoug, kAveraging };

struct SimSpec {
  Process process = Process::kSa;
  Problem problem;
  StepSchedule schedule;
  Vector x0;
  CheckpointPlan plan;
};

// Monte Carlo samples at the checkpoints, replica-major. y holds the
// rescaled iterate (x_k - x*)/sqrt(alpha_k) for SA runs, x_k/sqrt(alpha_k)
// for averaging runs, and is empty for DOUG-only runs; zhat/z are filled by
// the coupled engine (z alone by the DOUG engine). Diverged replicas carry
// NaN rows and are excluded from the statistics helpers.
struct TrajectoryBatch {
  CheckpointPlan checkpoints;
  long long replicas = 0;
  int dim = 0;
  std::vector<double> y;
  std::vector<double> zhat;
  std::vector<double> z;
  std::vector<std::uint8_t> diverged;
  std::vector<long long> first_bad_index;  // -1 where not diverged
  long long n_diverged = 0;
  std::vector<double> alpha_at;  // alpha_k at each checkpoint
  std::uint64_t master_seed = 0;

  double* row(std::vector<double>& a, long long r, std::size_t cp) {
    return a.data() + (r * static_cast<long long>(checkpoints.size()) +
                       static_cast<long long>(cp)) * dim;
  }
  const double* row(const std::vector<double>& a, long long r,
                    std::size_t cp) const {
    return a.data() + (r * static_cast<long long>(checkpoints.size()) +
                       static_cast<long long>(cp)) * dim;
  }
};

// Single-trajectory engines. Each throws Diverged with the first bad index.
// run_sa:        x_{k+1} = x_k + alpha_k (F(x_k) + A_k + b_k), records y_k.
// run_doug:      z_{k+1} = (I + alpha_k J_k^{(a,xi)}) z_k + sqrt(alpha_k) b_k.
// run_coupled:   one b-draw and one innovation per step feed x (full SA),
//                zhat (linear drift, A evaluated at the SA state) and z
//                (additive noise only); zhat_0 = z_0 = 0.
// run_averaging: x_{k+1} = (1 - alpha_k) x_k + alpha_k b_k, records
//                x_k/sqrt(alpha_k).
Matrix run_sa(const Problem& p, const StepSchedule& s, const Vector& x0,
              const CheckpointPlan& plan, RandomStream& rng);
Matrix run_doug(const Matrix& j, const StepSchedule& s, const NoiseModel& nm,
                const CheckpointPlan& plan, RandomStream& rng);
struct CoupledTriples {
  Matrix y, zhat, z;  // one row per checkpoint
};
CoupledTriples run_coupled(const Problem& p, const StepSchedule& s,
                           const Vector& x0, const CheckpointPlan& plan,
                           RandomStream& rng);
Matrix run_averaging(const NoiseModel& nm, const StepSchedule& s,
                     const Vector& x0, const CheckpointPlan& plan,
                     RandomStream& rng);

// Replica r uses stream (master_seed, r); results are identical for any
// worker count or execution order. Throws TooManyDiverged when more than 1%
// of replicas hit the divergence guard.
TrajectoryBatch monte_carlo(const SimSpec& spec, long long replicas,
                            std::uint64_t master_seed, int threads = 1);

// Statistics over non-diverged replicas.
Vector batch_mean(const TrajectoryBatch& b, const std::vector<double>& a,
                  std::size_t cp);
Matrix batch_cov(const TrajectoryBatch& b, const std::vector<double>& a,
                 std::size_t cp);
// E||x_k - x*||^2 = alpha_k * mean ||y_k||^2
double batch_mse(const TrajectoryBatch& b, std::size_t cp);
// mean ||z_k - zhat_k||^2
double batch_coupling_err(const TrajectoryBatch& b, std::size_t cp);
// copies checkpoint column cp of `a` into an n x dim matrix (skips diverged)
Matrix batch_slice(const TrajectoryBatch& b, const std::vector<double>& a,
                   std::size_t cp);

// Flat binary round-trip (little-endian doubles, replica-major) and a CSV
// dump for small runs.
void write_batch(const TrajectoryBatch& b, const std::string& path);
TrajectoryBatch read_batch(const std::string& path);
void write_batch_csv(const TrajectoryBatch& b, const std::string& path);

}  // namespace douglab
