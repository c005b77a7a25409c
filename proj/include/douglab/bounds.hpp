#pragma once

#include <string>
#include <vector>

#include "douglab/constants.hpp"
#include "douglab/model.hpp"
#include "douglab/schedule.hpp"

namespace douglab {

// V, iota_V, eta, Sigma1 (and Sigma2 when xi = 1) plus the weighted norms the
// theorem constants reuse. Sigma_n solves J Sigma + Sigma J^T + Sigma_b = 0,
// the orientation whose solution is the limit covariance of the simulated
// process (identical to the transposed convention for symmetric J).
SpectralConstants spectral_constants(const Matrix& j, const SpdMatrix& sigma_b,
                                     const StepSchedule& s, double gamma);

enum class BoundCase { kXi0, kXiMid, kXi1A, kXi1B, kXi1C };

struct BoundTerm {
  std::string label;
  double value = 0;
};

struct BoundReport {
  BoundCase case_tag = BoundCase::kXi0;
  std::vector<BoundTerm> terms;
  double total = 0;
  bool hypotheses_ok = false;
  double beta_used = 0;  // Stein Hoelder exponent actually instantiated
  double c2_used = 0;

  double term(const std::string& label) const;
};

struct FlaggedValue {
  double value = 0;
  bool hypotheses_ok = false;
};

// Mean-square error envelope, all three step-size cases (varsigma1 = 3/2).
FlaggedValue mse_bound(long long k, const StepSchedule& s,
                       const ProblemConstants& pc, double e0);

// E||z_k - zhat_k||^2 envelope of the shared-noise coupling; the xi = 1
// subcase follows sign(2 iota_V - 3 gamma) with the log-factor case taken
// when they agree to 1e-9 relative.
FlaggedValue coupling_bound(long long k, const StepSchedule& s,
                            const SpectralConstants& spec,
                            const ProblemConstants& pc, double e0);

// Wasserstein-1 bound for the DOUG iterates; itemized per the theorem with
// the Stein dominant term assembled at beta = 1 + 2/log(alpha_k) (a beta
// grid stands in when that instantiation leaves (0,1)).
BoundReport doug_w1_bound(long long k, const StepSchedule& s,
                          const SpectralConstants& spec,
                          const ProblemConstants& pc,
                          const SteinConstants& stein);

// Full SA Wasserstein-1 bound, every displayed summand of the explicit
// theorem for the active case/subcase. e0 = E||x0 - x*||^2,
// ev0 = E||x0 - x*||_V.
BoundReport sa_w1_bound(long long k, const StepSchedule& s,
                        const SpectralConstants& spec,
                        const ProblemConstants& pc, const SteinConstants& stein,
                        double e0, double ev0);

struct TailSandwich {
  double lower = 0;
  double upper = 1;
  double center = 0;
  double width = 0;
  double rho = 0;
  bool hypothesis_ok = false;  // w1 <= 1/2
};

// Gaussian-tail sandwich from a Wasserstein-1 value, with the optimized
// rho = 1 - sqrt(w1). Throws InvalidRho when w1 >= 1.
TailSandwich tail_sandwich(double a, const Vector& zeta, double w1_value,
                           const SpdMatrix& sigma);

struct MeanErrorBound {
  double leading = 0;
  double higher = 0;        // sqrt(alpha_k) * sa_w1_bound total (recorded choice)
  double total = 0;
  double e_norm = 0;        // Monte Carlo E||Sigma_2^{1/2} Z||
  double e_norm_stderr = 0;
  std::uint64_t mc_seed = 0;
  bool hypotheses_ok = false;
};

MeanErrorBound mean_error_bound(long long k, const StepSchedule& s,
                                const SpectralConstants& spec,
                                const ProblemConstants& pc,
                                const SteinConstants& stein, double e0,
                                double ev0, std::uint64_t mc_seed = 0xE2ULL);

// Closed-form envelope of u_{k+1} <= (1 - mu1 a_k) u_k
//   + mu2 1{xi<1} a_k exp(-rho1 a (k+K)^{1-xi} / (1-xi)) + mu3 a_k^{1+rho2}.
FlaggedValue rec_sol_closed_form(double u0, double mu1, double mu2, double mu3,
                                 double rho1, double rho2,
                                 const StepSchedule& s, long long k);

struct ThetaProducts {
  long long k = 0;
  double sum_exact = 0;   // sum_i ||Theta_i||^{2+beta}, exact
  double sum_bound = 0;
  double gap_exact = 0;   // || sum_i Theta_i Sigma_b Theta_i^T - Sigma_n ||
  double gap_bound = 0;
  bool sum_hypotheses_ok = false;
  bool gap_hypotheses_ok = false;
};

// Exact forward iteration of the weight products and the covariance
// recursion, evaluated at every index in ks (ascending), against the lemma
// envelopes.
std::vector<ThetaProducts> theta_products(const Matrix& j, const StepSchedule& s,
                                          const std::vector<long long>& ks,
                                          double beta, const SpdMatrix& sigma_b,
                                          const SpectralConstants& spec);

struct ContractionCheck {
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};

// ||I + e1 J + e1 e2 I||_V^2 <= 1 - iota_V e1 on the admissible box (xi < 1).
ContractionCheck contraction_check(const Matrix& j, const SpdMatrix& v,
                                   double eps1, double eps2);
// ||I + e J^{(alpha)}||_V^2 <= 1 - iota_V e for xi = 1 (needs 2 iota_V alpha >= 1).
ContractionCheck contraction_check_xi1(const Matrix& j, const SpdMatrix& v,
                                       double alpha, double eps);
// Symmetric negative definite specialization in the Euclidean norm.
ContractionCheck contraction_check_symmetric(const Matrix& j,
                                             const StepSchedule& s, long long l);

// Rate shells of the averaging CLT with a user constant c.
FlaggedValue clt_rate(long long k, const StepSchedule& s, double c);

}  // namespace douglab
