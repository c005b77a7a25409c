#pragma once

#include <optional>
#include <string>
#include <vector>

#include "douglab/constants.hpp"
#include "douglab/linalg.hpp"

namespace douglab {

// alpha_k = alpha / (k + K)^xi. alpha_0 <= 1 is a hard invariant.
struct StepSchedule {
  double alpha;
  long long K;
  double xi;

  StepSchedule(double alpha_, long long K_, double xi_);

  double step(long long k) const;
  double alpha0() const { return step(0); }
};

// J_k^{(alpha,xi)} = J + (alpha^{-1} xi / (2 (k+K)^{1-xi})) I; J itself for xi=0.
Matrix drift_matrix(const StepSchedule& s, long long k, const Matrix& j);

// k -> infinity limit: J for xi < 1, J + I/(2 alpha) for xi = 1 (which must
// stay Hurwitz, else NotHurwitzAfterShift).
Matrix limit_drift(const StepSchedule& s, const Matrix& j);

struct AdmissibilityEntry {
  std::string name;
  double required = 0;
  double actual = 0;
  bool satisfied = false;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityEntry> entries;

  bool all_satisfied() const;
  const AdmissibilityEntry* find(const std::string& name) const;
};

// One entry per inequality the lemmas/theorems impose on the active xi
// regime. Failures are reported, never thrown: runs on inadmissible
// schedules are allowed and bounds get flagged instead.
AdmissibilityReport validate_schedule(const StepSchedule& s,
                                      const ProblemConstants& c,
                                      const SpectralConstants& spec);

// Smallest K <= k_max making validate_schedule all-satisfied, by linear
// scan. xi must be in (0, 1]. nullopt when no K works (e.g. a K-independent
// condition fails).
std::optional<long long> find_min_K(double alpha, double xi,
                                    const ProblemConstants& c,
                                    const SpectralConstants& spec,
                                    long long k_max = 10'000'000);

}  // namespace douglab
