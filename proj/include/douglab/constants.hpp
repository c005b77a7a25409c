#pragma once

#include <optional>

#include "douglab/linalg.hpp"

namespace douglab {

// Scalars distilled from a Problem for the bound evaluators. varsigma1 is
// fixed at 3/2 throughout (the value the appendix instantiates).
struct ProblemConstants {
  double gamma = 0;
  double L_s = 0;
  double l = 0;
  double u = 0;
  double u_2s = 1;
  double varsigma0 = 0;   // u / l
  double varsigma2 = 0;   // u * u_2s * L_s * B2
  double alpha0_cap = 0;  // (2 - varsigma1) * gamma / (u * u_2s * L_s * (L_F + A1))
  double A1 = 0;
  double B1 = 0;
  double B2 = 0;
  double B3 = 0;
  double B_max = 1;
  double R1 = 0;
  double delta = 1;
  double L_F = 0;
};

inline constexpr double kVarsigma1 = 1.5;

inline double varsigma0_of(double l, double u) { return u / l; }
inline double varsigma2_of(double u, double u_2s, double L_s, double B2) {
  return u * u_2s * L_s * B2;
}
inline double alpha0_cap_of(double gamma, double u, double u_2s, double L_s,
                            double L_F, double A1) {
  return (2.0 - kVarsigma1) * gamma / (u * u_2s * L_s * (L_F + A1));
}

// V, its spectrum, the asymptotic covariances and the handful of weighted
// norms the theorem constants keep reusing.
struct SpectralConstants {
  SpdMatrix V;
  double lambda_max = 0;  // of V
  double lambda_min = 0;  // of V
  double iota_V = 0;      // 1 / (4 lambda_max), exact
  double eta = 0;         // min(iota_V / 2, 3 gamma / 4)
  SpdMatrix Sigma1;
  std::optional<SpdMatrix> Sigma2;  // xi = 1 only
  double sigma_max_1 = 0;           // max_beta ||S^{1/2}|| ||S^{-1/2}||^{2+beta}
  double sigma_max_2 = 0;           // same for Sigma2 (0 when absent)
  double norm_J_V = 0;          // ||J||_V
  double norm_J_2 = 0;          // ||J||
  double norm_Jalpha_V = 0;     // ||J^{(alpha)}||_V (xi = 1; else = norm_J_V)
  double norm_Jalpha_2 = 0;     // ||J^{(alpha)}||   (xi = 1; else = norm_J_2)
  double norm_Sigma1_V = 0;     // ||Sigma1||_V
  double norm_Sigma2_V = 0;     // ||Sigma2||_V (0 when absent)
  int dim = 0;
};

// Regularity constants of the Gaussian-Stein solution. C2 is not pinned
// numerically anywhere; it is configuration, default 2.0, and reports carry
// the value used.
struct SteinConstants {
  double C1_tilde_d = 0;  // 2^{3/2} (1 + 2 d Gamma((1+d)/2) / Gamma(d/2))
  double C2 = 2.0;
  double c1_of_beta(double beta) const { return C1_tilde_d + 2.0 / (1.0 - beta); }
};

SteinConstants stein_constants(int dim, double c2 = 2.0);

}  // namespace douglab
