#include "douglab/model.hpp"

#include <cmath>
#include <string>

namespace douglab {
namespace {

// max over x of (x - tanh x) / x^2 is ~0.264973 (attained near x = 1.60);
// 0.2680 leaves margin so the stored R1 is a certified envelope constant.
constexpr double kLogcoshResidualSlope = 0.2680;

void require_hurwitz(const Matrix& j, const char* who) {
  if (!is_hurwitz(j))
    throw NotHurwitzAfterShift(std::string(who) + ": jacobian is not Hurwitz");
}

double chi_moment(int d, double mu) {
  // E chi_d^mu = 2^{mu/2} Gamma((d+mu)/2) / Gamma(d/2)
  return std::exp(0.5 * mu * std::log(2.0) + std::lgamma(0.5 * (d + mu)) -
                  std::lgamma(0.5 * d));
}

double unit_draw(AdditiveKind kind, RandomStream& rng) {
  switch (kind) {
    case AdditiveKind::kGaussian:
      return rng.normal();
    case AdditiveKind::kUniformCube:
      return rng.uniform(-1.7320508075688772935, 1.7320508075688772935);
    case AdditiveKind::kRademacherProduct:
      return rng.rademacher();
    case AdditiveKind::kCenteredExponential:
      return rng.centered_exponential();
  }
  return 0.0;
}

}  // namespace

Operator make_linear_operator(const Matrix& jacobian, const Vector& x_star) {
  require_hurwitz(jacobian, "make_linear_operator");
  Operator op;
  op.jacobian = jacobian;
  op.x_star = x_star;
  op.residual_kind = ResidualKind::kNone;
  op.R1 = 0.0;
  op.delta = 1.0;
  op.L_F = spectral_norm(jacobian);
  return op;
}

Operator make_saturating_operator(const Matrix& jacobian, const Vector& x_star,
                                  double R1, double delta, double saturation_s) {
  require_hurwitz(jacobian, "make_saturating_operator");
  if (R1 < 0) throw ConfigError("saturating operator: R1 must be >= 0");
  if (!(delta > 0 && delta <= 1)) throw ConfigError("saturating operator: delta in (0,1]");
  if (!(saturation_s > 0)) throw ConfigError("saturating operator: s must be > 0");
  Operator op;
  op.jacobian = jacobian;
  op.x_star = x_star;
  op.residual_kind = ResidualKind::kSaturatingPower;
  op.R1 = R1;
  op.delta = delta;
  op.saturation_s = saturation_s;
  op.L_F = spectral_norm(jacobian) +
           R1 * (1.0 + delta) * std::pow(saturation_s, delta);
  return op;
}

Operator make_logcosh_operator(const SpdMatrix& hessian, double eps) {
  if (eps < 0) throw ConfigError("logcosh operator: eps must be >= 0");
  const Eigen::Index d = hessian.dim();
  Matrix j = -(hessian.mat() + eps * Matrix::Identity(d, d));
  Operator op;
  op.jacobian = j;
  op.x_star = Vector::Zero(d);
  op.residual_kind = ResidualKind::kLogcoshGradient;
  op.logcosh_eps = eps;
  op.R1 = kLogcoshResidualSlope * eps;
  op.delta = 1.0;
  op.L_F = spectral_norm(j) + eps;
  return op;
}

Vector eval_operator(const Operator& op, const Vector& x) {
  if (x.size() != op.dim())
    throw DimensionMismatch("eval_operator: x dim " + std::to_string(x.size()));
  Vector out(op.dim());
  eval_operator_into(op, x, out);
  return out;
}

void eval_operator_into(const Operator& op, const Vector& x, Vector& out) {
  out.noalias() = op.jacobian * x;
  out.noalias() -= op.jacobian * op.x_star;
  switch (op.residual_kind) {
    case ResidualKind::kNone:
      break;
    case ResidualKind::kSaturatingPower: {
      double n2 = 0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double e = x(i) - op.x_star(i);
        n2 += e * e;
      }
      const double r = std::min(std::sqrt(n2), op.saturation_s);
      const double c = op.R1 * std::pow(r, op.delta);
      for (Eigen::Index i = 0; i < x.size(); ++i)
        out(i) += c * (x(i) - op.x_star(i));
      break;
    }
    case ResidualKind::kLogcoshGradient:
      // F = -(H + eps I)x + eps (x - tanh x); x* = 0 for this family
      for (Eigen::Index i = 0; i < x.size(); ++i)
        out(i) += op.logcosh_eps * (x(i) - std::tanh(x(i)));
      break;
  }
}

Vector sample_additive(const NoiseModel& nm, RandomStream& rng) {
  Vector scratch(nm.dim()), out(nm.dim());
  sample_additive_into(nm, rng, scratch, out);
  return out;
}

void sample_additive_into(const NoiseModel& nm, RandomStream& rng,
                          Vector& scratch, Vector& out) {
  const Eigen::Index d = nm.dim();
  for (Eigen::Index i = 0; i < d; ++i)
    scratch(i) = unit_draw(nm.additive_kind, rng);
  out.noalias() = nm.sigma_b.chol() * scratch;
  if (nm.additive_scale != 1.0) out *= nm.additive_scale;
}

double sample_innovation(const NoiseModel& nm, RandomStream& rng) {
  switch (nm.multiplicative_kind) {
    case MultiplicativeKind::kNone:
      return 0.0;
    case MultiplicativeKind::kScalarRademacher:
      return rng.rademacher();
    case MultiplicativeKind::kScalarGaussian:
      return rng.normal();
  }
  return 0.0;
}

NoiseDraw sample_noise(const NoiseModel& nm, const Vector& x,
                       const Vector& x_star, RandomStream& rng) {
  NoiseDraw d;
  d.b_term = sample_additive(nm, rng);
  const double eta = sample_innovation(nm, rng);
  d.a_term = nm.multiplicative_scale * eta * (x - x_star);
  return d;
}

NoiseMoments moments_of(const NoiseModel& nm, std::uint64_t mc_seed) {
  NoiseMoments m;
  const Eigen::Index d = nm.dim();
  const double sc = std::abs(nm.additive_scale);
  m.B2 = sc * sc * nm.sigma_b.mat().trace();

  bool closed = false;
  if (sc == 0.0) {
    m.B1 = m.B3 = 0.0;
    closed = true;
  } else if (d == 1) {
    const double s = sc * nm.sigma_b.chol()(0, 0);
    closed = true;
    switch (nm.additive_kind) {
      case AdditiveKind::kGaussian:
        m.B1 = s * std::sqrt(2.0 / M_PI);
        m.B3 = s * s * s * 2.0 * std::sqrt(2.0 / M_PI);
        break;
      case AdditiveKind::kUniformCube:
        m.B1 = s * std::sqrt(3.0) / 2.0;
        m.B3 = s * s * s * 3.0 * std::sqrt(3.0) / 4.0;
        break;
      case AdditiveKind::kRademacherProduct:
        m.B1 = s;
        m.B3 = s * s * s;
        break;
      case AdditiveKind::kCenteredExponential:
        m.B1 = s * 2.0 / M_E;
        m.B3 = s * s * s * (12.0 / M_E - 2.0);
        break;
    }
  } else if (nm.additive_kind == AdditiveKind::kGaussian) {
    const Matrix& sb = nm.sigma_b.mat();
    const double sigma2 = sb(0, 0);
    const bool isotropic =
        (sb - sigma2 * Matrix::Identity(d, d)).norm() <= 1e-12 * sb.norm();
    if (isotropic) {
      const double s = sc * std::sqrt(sigma2);
      m.B1 = s * chi_moment(static_cast<int>(d), 1.0);
      m.B3 = s * s * s * chi_moment(static_cast<int>(d), 3.0);
      closed = true;
    }
  }

  if (!closed) {
    constexpr long long n = 1'000'000;
    RandomStream rng(mc_seed, 0xB0075ULL);
    double s1 = 0, s2_1 = 0, s3 = 0, s2_3 = 0;
    for (long long i = 0; i < n; ++i) {
      const double r = sample_additive(nm, rng).norm();
      const double r3 = r * r * r;
      s1 += r;
      s2_1 += r * r;
      s3 += r3;
      s2_3 += r3 * r3;
    }
    m.B1 = s1 / n;
    m.B3 = s3 / n;
    m.stderr_B1 = std::sqrt(std::max(0.0, s2_1 / n - m.B1 * m.B1) / n);
    m.stderr_B3 = std::sqrt(std::max(0.0, s2_3 / n - m.B3 * m.B3) / n);
    m.monte_carlo = true;
  }
  m.B_max = std::max({m.B1, m.B2, m.B3, 1.0});
  return m;
}

LyapunovCertificate::LyapunovCertificate(const SpdMatrix& P_, double gamma_,
                                         double L_s_, double u_2s_)
    : P(P_), gamma(gamma_), L_s(L_s_), u_2s(u_2s_) {
  if (!(gamma > 0)) throw ConfigError("certificate: gamma must be > 0");
  if (!(L_s > 0)) throw ConfigError("certificate: L_s must be > 0");
  if (!(u_2s > 0)) throw ConfigError("certificate: u_2s must be > 0");
  const EigenDecomposition ed = symmetric_eigen(P.mat());
  l = 1.0 / ed.values(ed.values.size() - 1);
  u = 1.0 / ed.values(0);
}

ProblemConstants problem_constants(const Problem& p) {
  ProblemConstants c;
  const LyapunovCertificate& cert = p.certificate;
  c.gamma = cert.gamma;
  c.L_s = cert.L_s;
  c.l = cert.l;
  c.u = cert.u;
  c.u_2s = cert.u_2s;
  c.A1 = p.noise.A1();
  const NoiseMoments m = moments_of(p.noise);
  c.B1 = m.B1;
  c.B2 = m.B2;
  c.B3 = m.B3;
  c.B_max = m.B_max;
  c.R1 = p.op.R1;
  c.delta = p.op.delta;
  c.L_F = p.op.L_F;
  c.varsigma0 = varsigma0_of(c.l, c.u);
  c.varsigma2 = varsigma2_of(c.u, c.u_2s, c.L_s, c.B2);
  c.alpha0_cap = alpha0_cap_of(c.gamma, c.u, c.u_2s, c.L_s, c.L_F, c.A1);
  return c;
}

}  // namespace douglab
