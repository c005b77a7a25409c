#pragma once

#include "douglab/linalg.hpp"
#include "douglab/rng.hpp"

namespace douglab {

// Empirical samples, one row per point.
using SampleSet = Matrix;

enum class W1Method { kExact1d, kExactMatching, kSliced };

struct W1Estimate {
  double value = 0;
  W1Method method = W1Method::kExact1d;
  long long n = 0;       // smaller of the two sample counts
  double stderr_ = 0;    // bootstrap (sliced: bootstrap with shared directions)
  int n_projections = 0; // sliced only
};

// Exact 1-D optimal transport between empirical measures: sorted mean
// absolute difference for equal sizes, the integral of |F - G| over the
// merged support otherwise. stderr from `bootstrap` resamples.
W1Estimate w1_1d(const SampleSet& xs, const SampleSet& ys, int bootstrap = 200,
                 std::uint64_t boot_seed = 0xB007ULL);

// Minimum-cost perfect matching under Euclidean cost (Hungarian algorithm,
// O(n^3)), equal sizes only, n <= 512.
W1Estimate w1_exact_matching(const SampleSet& xs, const SampleSet& ys,
                             int bootstrap = 200,
                             std::uint64_t boot_seed = 0xB007ULL);

// Mean 1-D transport over random unit projection directions; a lower-bound
// style estimator of the true W1.
W1Estimate w1_sliced(const SampleSet& xs, const SampleSet& ys,
                     int n_projections, RandomStream& rng, int bootstrap = 200);

// n draws of L g with L the Cholesky factor of sigma; same law as
// Sigma^{1/2} Z since L L^T = Sigma.
SampleSet sample_gaussian(const SpdMatrix& sigma, long long n, RandomStream& rng);

// Exact W1 between centered 1-D Gaussians: |s1 - s2| sqrt(2/pi).
double w1_gaussian_1d(double sigma1, double sigma2);

struct TailEstimate {
  double p_hat = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  long long n = 0;
};

// Empirical frequency of <x, zeta> > a with a 95% Wilson interval.
TailEstimate directional_tail(const SampleSet& xs, const Vector& zeta, double a);

// Standard normal tail helpers (|abs error| well below 1e-12; validated
// against a quadrature oracle in the test suite).
double normal_ccdf(double x);
double normal_pdf(double x);

}  // namespace douglab
