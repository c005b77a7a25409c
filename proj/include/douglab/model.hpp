#pragma once

#include <optional>

#include "douglab/constants.hpp"
#include "douglab/linalg.hpp"
#include "douglab/rng.hpp"

namespace douglab {

enum class ResidualKind { kNone, kSaturatingPower, kLogcoshGradient };
enum class AdditiveKind { kGaussian, kUniformCube, kRademacherProduct, kCenteredExponential };
enum class MultiplicativeKind { kNone, kScalarRademacher, kScalarGaussian };

// F(x) = J_F (x - x*) + R(x), J_F Hurwitz, ||R(x)|| <= R1 ||x - x*||^{1+delta}.
//
// saturating_power: R(x) = R1 (x - x*) min(||x - x*||, s)^delta -- the
// envelope holds with equality below the saturation radius s.
// logcosh_gradient: F = -grad(0.5 x'Hx + eps sum_i logcosh(x_i)), so
// J_F = -(H + eps I), R(x) = eps (x - tanh(x)), R1 = 0.2680 eps, delta = 1.
struct Operator {
  Matrix jacobian;
  Vector x_star;
  ResidualKind residual_kind = ResidualKind::kNone;
  double R1 = 0.0;
  double delta = 1.0;
  double saturation_s = 1.0;
  double logcosh_eps = 0.0;  // logcosh_gradient only
  double L_F = 0.0;          // Lipschitz constant, filled by make_*

  Eigen::Index dim() const { return jacobian.rows(); }
};

Operator make_linear_operator(const Matrix& jacobian, const Vector& x_star);
Operator make_saturating_operator(const Matrix& jacobian, const Vector& x_star,
                                  double R1, double delta, double saturation_s);
// g(x) = 0.5 x'Hx + eps sum_i logcosh(x_i); F = -grad g; x* = 0.
Operator make_logcosh_operator(const SpdMatrix& hessian, double eps);

Vector eval_operator(const Operator& op, const Vector& x);

// M_k = A(v_k, x_k) + b(w_k). The additive part is L u with L the Cholesky
// factor of Sigma_b and u i.i.d. unit-variance scalars of the chosen family;
// the multiplicative part is a1 * eta * (x - x*) with eta a unit-variance
// scalar innovation, so E[||A||^2 | F] = a1^2 ||x - x*||^2 (A1 = a1^2).
struct NoiseModel {
  AdditiveKind additive_kind = AdditiveKind::kGaussian;
  SpdMatrix sigma_b;
  MultiplicativeKind multiplicative_kind = MultiplicativeKind::kNone;
  double multiplicative_scale = 0.0;  // a1
  double additive_scale = 1.0;        // b = scale * L u; 0 silences the noise

  explicit NoiseModel(const SpdMatrix& sb) : sigma_b(sb) {}

  double A1() const { return multiplicative_scale * multiplicative_scale; }
  Eigen::Index dim() const { return sigma_b.dim(); }
};

struct NoiseDraw {
  Vector a_term;
  Vector b_term;
};

// The two components come back separately so couplings can reuse b_term.
NoiseDraw sample_noise(const NoiseModel& nm, const Vector& x,
                       const Vector& x_star, RandomStream& rng);
// Additive part only (what the DOUG recursion consumes).
Vector sample_additive(const NoiseModel& nm, RandomStream& rng);
// Allocation-free variant for the simulation loops; scratch must have the
// noise dimension.
void sample_additive_into(const NoiseModel& nm, RandomStream& rng,
                          Vector& scratch, Vector& out);
// Multiplicative innovation eta (mean 0, variance 1; 0 when kind = none).
double sample_innovation(const NoiseModel& nm, RandomStream& rng);

// F(x) written into out without allocating.
void eval_operator_into(const Operator& op, const Vector& x, Vector& out);

struct NoiseMoments {
  double B1 = 0, B2 = 0, B3 = 0, B_max = 1;
  double stderr_B1 = 0, stderr_B3 = 0;  // 0 when closed-form
  bool monte_carlo = false;
};

// Closed forms where available (gaussian B2 = tr Sigma_b always; B1/B3 via
// chi moments when isotropic; d = 1 families in closed form); otherwise
// 10^6-draw Monte Carlo with recorded standard errors.
NoiseMoments moments_of(const NoiseModel& nm, std::uint64_t mc_seed = 0x5eedULL);

// Quadratic certificate Phi(x) = x' P x with the Assumption-1 constants.
// l = 1/lambda_max(P), u = 1/lambda_min(P) so that l Phi <= ||x||^2 <= u Phi.
struct LyapunovCertificate {
  SpdMatrix P;
  double gamma;
  double L_s;
  double l;
  double u;
  double u_2s;

  LyapunovCertificate(const SpdMatrix& P_, double gamma_, double L_s_,
                      double u_2s_ = 1.0);

  double phi(const Vector& e) const { return e.dot(P.mat() * e); }
};

struct Problem {
  Operator op;
  NoiseModel noise;
  LyapunovCertificate certificate;

  Eigen::Index dim() const { return op.dim(); }
};

// Distills the Assumption-level scalars used by every bound evaluator.
ProblemConstants problem_constants(const Problem& p);

}  // namespace douglab
