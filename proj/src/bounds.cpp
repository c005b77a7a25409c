#include "douglab/bounds.hpp"

#include <cmath>
#include <limits>

#include "douglab/rng.hpp"
#include "douglab/transport.hpp"

namespace douglab {
namespace {

// (e^{-r1 t} - e^{-r2 t}) / (r2 - r1), continuous through r1 == r2.
double expdiff(double r1, double r2, double t) {
  const double scale = std::max({std::abs(r1), std::abs(r2), 1e-300});
  if (std::abs(r2 - r1) <= 1e-9 * scale)
    return t * std::exp(-0.5 * (r1 + r2) * t);
  return (std::exp(-r1 * t) - std::exp(-r2 * t)) / (r2 - r1);
}

// coef * base1^p1 * base2^p2 assembled in log space (safe for the large
// transient exponents the xi = 1 cases produce). coef == 0 short-circuits.
double powprod(double coef, double base1, double p1, double base2, double p2) {
  if (coef == 0.0) return 0.0;
  return coef * std::exp(p1 * std::log(base1) + p2 * std::log(base2));
}

double sigma_max_of(const SpdMatrix& sigma) {
  const EigenDecomposition ed = symmetric_eigen(sigma.mat());
  const double lmax = ed.values(ed.values.size() - 1);
  const double lmin = ed.values(0);
  if (!(lmin > pd_tolerance(sigma.mat())))
    throw NotPd("sigma_max_of: covariance too degenerate for Stein constants");
  const double r_half = std::sqrt(lmax);         // ||Sigma^{1/2}||
  const double r_invh = 1.0 / std::sqrt(lmin);   // ||Sigma^{-1/2}||
  return r_half * std::max(r_invh * r_invh, r_invh * r_invh * r_invh);
}

struct SteinPack {
  double phi10 = 0;  // C2 sqrt(lM/lm) sigma_max ||J^||
  double phi11 = 0;  // phi10 ||Sigma_n||_V
  double phi12 = 0;  // phi10 (||J||_V + 1/(2a))^2 ||Sigma_n||_V
  double phi2 = 0;   // (lM/lm)^{3/2} sigma_max ||J^|| B2 Bmax
  double phi3 = 0;   // (lM/lm)^{3/2} Bmax ||J^|| sigma_max
};

SteinPack stein_pack(const StepSchedule& s, const SpectralConstants& spec,
                     const ProblemConstants& pc, const SteinConstants& st) {
  const bool xi1 = s.xi == 1.0;
  const double sig_max = xi1 ? spec.sigma_max_2 : spec.sigma_max_1;
  const double norm_jhat = xi1 ? spec.norm_Jalpha_2 : spec.norm_J_2;
  const double norm_sig_v = xi1 ? spec.norm_Sigma2_V : spec.norm_Sigma1_V;
  const double ratio = spec.lambda_max / spec.lambda_min;
  SteinPack p;
  p.phi10 = st.C2 * std::sqrt(ratio) * sig_max * norm_jhat;
  p.phi11 = p.phi10 * norm_sig_v;
  const double jv_shift = spec.norm_J_V + 0.5 / s.alpha;
  p.phi12 = p.phi10 * jv_shift * jv_shift * norm_sig_v;
  p.phi2 = std::pow(ratio, 1.5) * sig_max * norm_jhat * pc.B2 * pc.B_max;
  p.phi3 = std::pow(ratio, 1.5) * pc.B_max * norm_jhat * sig_max;
  return p;
}

// C1(d, beta) * alpha_k^{beta/2} at beta = 1 + 2/log(alpha_k) when that lies
// in (0,1) (then the value is e (C1~ - log alpha_k) sqrt(alpha_k)); otherwise
// the best beta on a grid, each grid point being a valid bound.
double stein_dominant_factor(const SteinConstants& st, double alpha_k,
                             double* beta_used) {
  const double la = std::log(alpha_k);
  if (la < -2.0) {
    const double beta = 1.0 + 2.0 / la;
    if (beta_used) *beta_used = beta;
    return M_E * (st.C1_tilde_d - la) * std::sqrt(alpha_k);
  }
  double best = std::numeric_limits<double>::infinity();
  double best_beta = 0.5;
  for (int i = 1; i <= 99; ++i) {
    const double beta = i / 100.0;
    const double v = st.c1_of_beta(beta) * std::pow(alpha_k, 0.5 * beta);
    if (v < best) {
      best = v;
      best_beta = beta;
    }
  }
  if (beta_used) *beta_used = best_beta;
  return best;
}

double theta1_sq(const SpectralConstants& spec, const ProblemConstants& pc) {
  // vartheta_1^2 = 2 A1 varsigma_0 (lambda^max)^2
  return 2.0 * pc.A1 * pc.varsigma0 * spec.lambda_max * spec.lambda_max;
}

double theta2_sq(const SpectralConstants& spec, const ProblemConstants& pc) {
  // vartheta_2^2 = 2 A1 varsigma_2 (lambda^max)^2 / 3
  return 2.0 * pc.A1 * pc.varsigma2 * spec.lambda_max * spec.lambda_max / 3.0;
}

BoundCase xi1_subcase(const SpectralConstants& spec, const ProblemConstants& pc) {
  const double lhs = 2.0 * spec.iota_V;
  const double rhs = 3.0 * pc.gamma;
  if (std::abs(lhs - rhs) <= 1e-9 * std::max(lhs, rhs)) return BoundCase::kXi1C;
  return lhs > rhs ? BoundCase::kXi1A : BoundCase::kXi1B;
}

bool hyp(const AdmissibilityReport& r, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    const AdmissibilityEntry* e = r.find(n);
    if (e == nullptr || !e->satisfied) return false;
  }
  return true;
}

}  // namespace

SteinConstants stein_constants(int dim, double c2) {
  SteinConstants st;
  st.C2 = c2;
  const double g = std::exp(std::lgamma(0.5 * (1 + dim)) - std::lgamma(0.5 * dim));
  st.C1_tilde_d = std::pow(2.0, 1.5) * (1.0 + 2.0 * dim * g);
  return st;
}

SpectralConstants spectral_constants(const Matrix& j, const SpdMatrix& sigma_b,
                                     const StepSchedule& s, double gamma) {
  const Eigen::Index d = j.rows();
  if (sigma_b.dim() != d) throw DimensionMismatch("spectral_constants: dims");

  Matrix v_raw = solve_lyapunov(j, Matrix::Identity(d, d));
  SpdMatrix v(v_raw);  // NotPd here means J was not Hurwitz
  const EigenDecomposition ed = symmetric_eigen(v.mat());

  SpectralConstants sc{v, 0, 0, 0, 0, SpdMatrix(solve_lyapunov(j.transpose(), sigma_b.mat())),
                       std::nullopt, 0, 0, 0, 0, 0, 0, 0, 0, static_cast<int>(d)};
  sc.lambda_max = ed.values(d - 1);
  sc.lambda_min = ed.values(0);
  sc.iota_V = 1.0 / (4.0 * sc.lambda_max);
  sc.eta = std::min(sc.iota_V / 2.0, 0.75 * gamma);
  sc.sigma_max_1 = sigma_max_of(sc.Sigma1);
  sc.norm_J_V = v_operator_norm(j, v);
  sc.norm_J_2 = spectral_norm(j);
  sc.norm_Jalpha_V = sc.norm_J_V;
  sc.norm_Jalpha_2 = sc.norm_J_2;
  sc.norm_Sigma1_V = v_operator_norm(sc.Sigma1.mat(), v);

  if (s.xi == 1.0) {
    const Matrix ja = j + (0.5 / s.alpha) * Matrix::Identity(d, d);
    if (!is_hurwitz(ja))
      throw NotHurwitzAfterShift("spectral_constants: J + I/(2 alpha) not Hurwitz");
    sc.Sigma2 = SpdMatrix(solve_lyapunov(ja.transpose(), sigma_b.mat()));
    sc.sigma_max_2 = sigma_max_of(*sc.Sigma2);
    sc.norm_Jalpha_V = v_operator_norm(ja, v);
    sc.norm_Jalpha_2 = spectral_norm(ja);
    sc.norm_Sigma2_V = v_operator_norm(sc.Sigma2->mat(), v);
  }
  return sc;
}

double BoundReport::term(const std::string& label) const {
  for (const auto& t : terms)
    if (t.label == label) return t.value;
  throw ConfigError("BoundReport: no term labelled " + label);
}

FlaggedValue mse_bound(long long k, const StepSchedule& s,
                       const ProblemConstants& pc, double e0) {
  const double a = s.alpha;
  const double ak = s.step(k);
  const double g = pc.gamma;
  FlaggedValue out;
  if (s.xi == 0.0) {
    out.value = pc.varsigma0 * e0 * std::exp(-kVarsigma1 * g * a * k) +
                pc.varsigma2 * a / (kVarsigma1 * g);
    out.hypotheses_ok = a <= pc.alpha0_cap + 1e-12 && a <= 1.0 + 1e-15;
  } else if (s.xi < 1.0) {
    const double t = std::pow(static_cast<double>(k + s.K), 1.0 - s.xi);
    const double t0 = std::pow(static_cast<double>(s.K), 1.0 - s.xi);
    out.value = pc.varsigma0 * e0 *
                    std::exp(-kVarsigma1 * g * a / (1.0 - s.xi) * (t - t0)) +
                2.0 * pc.varsigma2 * ak / (kVarsigma1 * g);
    out.hypotheses_ok =
        static_cast<double>(s.K) >=
            std::pow(1.0 / (kVarsigma1 * g * a), 1.0 / (1.0 - s.xi)) - 1e-12 &&
        s.alpha0() <= std::min(pc.alpha0_cap, 1.0) + 1e-12;
  } else {
    const double p = kVarsigma1 * g * a;
    out.value = powprod(pc.varsigma0 * e0, static_cast<double>(s.K), p,
                        static_cast<double>(k + s.K), -p) +
                a * pc.varsigma2 * ak / (p - 1.0);
    out.hypotheses_ok = p > 1.0 && s.alpha0() <= std::min(pc.alpha0_cap, 1.0) + 1e-12;
  }
  return out;
}

FlaggedValue coupling_bound(long long k, const StepSchedule& s,
                            const SpectralConstants& spec,
                            const ProblemConstants& pc, double e0) {
  const double a = s.alpha;
  const double ak = s.step(k);
  const double g = pc.gamma;
  const double iota = spec.iota_V;
  const double th1 = theta1_sq(spec, pc);
  const double th2 = theta2_sq(spec, pc);
  const double jv2 = spec.norm_J_V * spec.norm_J_V;
  FlaggedValue out;

  if (s.xi == 0.0) {
    const double transient =
        th1 * e0 * std::exp(iota * a) * (0.5 * a) *
        expdiff(kVarsigma1 * g * a, iota * a, static_cast<double>(k));
    out.value = transient + th2 * a / (iota * g);
    out.hypotheses_ok =
        a <= std::min({1.0, 2.0 * iota / jv2, pc.alpha0_cap}) + 1e-12;
  } else if (s.xi < 1.0) {
    const double t = std::pow(static_cast<double>(k + s.K), 1.0 - s.xi);
    const double c1 = kVarsigma1 * g * a / (1.0 - s.xi);
    const double c2 = iota * a / (1.0 - s.xi);
    const double transient =
        th1 * e0 * std::exp(iota * a) * (0.5 * a / (1.0 - s.xi)) *
        expdiff(c1, c2, t);
    out.value = transient + 4.0 * th2 * ak / (iota * g);
    const double shift = s.xi * std::pow(static_cast<double>(s.K), s.xi - 1.0) / (2.0 * a);
    out.hypotheses_ok =
        static_cast<double>(s.K) >=
            std::pow(1.0 / (iota * a), 1.0 / (1.0 - s.xi)) - 1e-12 &&
        static_cast<double>(s.K) >=
            std::pow(1.0 / (kVarsigma1 * g * a), 1.0 / (1.0 - s.xi)) - 1e-12 &&
        s.alpha0() <= std::min({1.0, 2.0 * iota / jv2, pc.alpha0_cap}) + 1e-12 &&
        shift <= std::min(1.0, iota / 3.0) + 1e-12;
  } else {
    const double steady =
        3.0 * th2 * a * a * ak / ((3.0 * g * a - 2.0) * (iota * a - 1.0));
    const BoundCase c = xi1_subcase(spec, pc);
    double transient = 0;
    const double dk = static_cast<double>(k + s.K);
    if (c == BoundCase::kXi1A) {
      // K^{1.5ga} ak^{1.5ga} / a^{1.5g}, exponents combined
      transient = (th1 == 0 || e0 == 0)
                      ? 0.0
                      : th1 * e0 / (2.0 * iota - 3.0 * g) *
                            std::exp(1.5 * g * a * std::log(static_cast<double>(s.K)) +
                                     1.5 * g * a * std::log(ak) -
                                     1.5 * g * std::log(a));
    } else if (c == BoundCase::kXi1B) {
      transient = (th1 == 0 || e0 == 0)
                      ? 0.0
                      : 2.0 * th1 * e0 / (3.0 * g - 2.0 * iota) *
                            std::exp(1.5 * g * a * std::log(2.0 * static_cast<double>(s.K)) +
                                     iota * a * (std::log(ak) - std::log(a)));
    } else {
      transient = (th1 == 0 || e0 == 0)
                      ? 0.0
                      : th1 * e0 * std::log(dk) *
                            std::exp(iota * a * std::log(2.0 * static_cast<double>(s.K)) +
                                     (1.0 - iota * a) * std::log(a) +
                                     iota * a * std::log(ak));
    }
    out.value = transient + steady;
    out.hypotheses_ok = 3.0 * a * g > 2.0 && iota * a > 1.0 &&
                        s.alpha0() <= std::min(pc.alpha0_cap, 1.0) + 1e-12 &&
                        s.alpha0() <= 4.0 * iota / (4.0 * jv2 + 1.0 / (a * a)) + 1e-12;
  }
  return out;
}

BoundReport doug_w1_bound(long long k, const StepSchedule& s,
                          const SpectralConstants& spec,
                          const ProblemConstants& pc,
                          const SteinConstants& stein) {
  const double a = s.alpha;
  const double ak = s.step(k);
  const double iota = spec.iota_V;
  const double jv2 = spec.norm_J_V * spec.norm_J_V;
  const SteinPack p = stein_pack(s, spec, pc, stein);
  const int d = spec.dim;

  if (s.xi == 1.0 && !spec.Sigma2.has_value())
    throw ConfigError("doug_w1_bound: xi = 1 needs Sigma2 in SpectralConstants");

  BoundReport r;
  r.c2_used = stein.C2;
  double dom_factor = stein_dominant_factor(stein, ak, &r.beta_used);
  const double dom_coef = (d * p.phi2 + p.phi3);

  if (s.xi == 0.0) {
    r.case_tag = BoundCase::kXi0;
    r.terms.push_back({"stein_dominant", dom_coef * dom_factor / iota});
    r.terms.push_back({"stein_mid", d * p.phi12 * a / iota});
    r.terms.push_back({"stein_transient",
                       d * p.phi11 * std::exp(-iota * a * static_cast<double>(k))});
    r.hypotheses_ok = a <= std::min(1.0, 2.0 * iota / jv2) + 1e-12;
  } else if (s.xi < 1.0) {
    r.case_tag = BoundCase::kXiMid;
    const double t = std::pow(static_cast<double>(k + s.K), 1.0 - s.xi);
    const double t0 = std::pow(static_cast<double>(s.K), 1.0 - s.xi);
    r.terms.push_back({"stein_dominant", 2.0 * dom_coef * dom_factor / iota});
    r.terms.push_back({"stein_mid", 2.0 * d * p.phi12 * ak / iota});
    r.terms.push_back({"stein_transient",
                       d * p.phi11 *
                           std::exp(-iota * a / (1.0 - s.xi) * (t - t0))});
    const double shift = s.xi * std::pow(static_cast<double>(s.K), s.xi - 1.0) / (2.0 * a);
    r.hypotheses_ok =
        static_cast<double>(s.K) >=
            std::pow(1.0 / (iota * a), 1.0 / (1.0 - s.xi)) - 1e-12 &&
        s.alpha0() <= std::min(1.0, 2.0 * iota / jv2) + 1e-12 &&
        shift <= std::min(1.0, iota / 3.0) + 1e-12;
  } else {
    r.case_tag = BoundCase::kXi1A;
    r.terms.push_back(
        {"stein_dominant", 2.0 * dom_coef * dom_factor * a / (2.0 * iota * a - 1.0)});
    r.terms.push_back({"stein_mid", d * p.phi12 * a * ak / (iota * a - 1.0)});
    r.terms.push_back({"stein_transient",
                       powprod(d * p.phi11, static_cast<double>(s.K), iota * a,
                               static_cast<double>(k + s.K), -iota * a)});
    r.hypotheses_ok = iota * a > 1.0 &&
                      s.alpha0() <= 4.0 * iota / (4.0 * jv2 + 1.0 / (a * a)) + 1e-12;
  }
  for (const auto& t : r.terms) r.total += t.value;
  return r;
}

BoundReport sa_w1_bound(long long k, const StepSchedule& s,
                        const SpectralConstants& spec,
                        const ProblemConstants& pc, const SteinConstants& stein,
                        double e0, double ev0) {
  const double a = s.alpha;
  const double ak = s.step(k);
  const double a0 = s.alpha0();
  const double g = pc.gamma;
  const double iota = spec.iota_V;
  const double lM = spec.lambda_max;
  const double delta = pc.delta;
  const double th1 = std::sqrt(theta1_sq(spec, pc));
  const double th2 = std::sqrt(theta2_sq(spec, pc));
  const double e0h = std::pow(e0, 0.5 * (1.0 + delta));  // E0^{(1+delta)/2}
  const SteinPack p = stein_pack(s, spec, pc, stein);
  const int d = spec.dim;

  // rho constants (eq. varrho), alpha_0 entering rho4/rho5 as displayed
  const double rho1 = 4.0 * lM * std::pow(pc.varsigma0, 0.5 * (1.0 + delta)) * pc.R1;
  const double rho2c = (4.0 / 3.0) * lM * std::pow(pc.varsigma2, 0.5 * (1.0 + delta)) * pc.R1;
  const double bracket = 1.0 / (8.0 * a * a) + std::sqrt(2.0) * (pc.L_F + pc.A1) / a;
  const double rho3 = std::sqrt(pc.varsigma0 * lM) * bracket;
  const double rho4 = std::sqrt(2.0 * lM) * pc.B1 / a +
                      bracket * std::sqrt(4.0 * pc.varsigma2 * a0 * lM / (2.0 * g));
  const double rho5 =
      (3.0 * g * a > 2.0)
          ? std::sqrt(2.0 * lM) * pc.B1 / a +
                bracket * std::sqrt(2.0 * a * pc.varsigma2 * a0 / (3.0 * g * a - 2.0))
          : std::numeric_limits<double>::infinity();

  if (s.xi == 1.0 && !spec.Sigma2.has_value())
    throw ConfigError("sa_w1_bound: xi = 1 needs Sigma2 in SpectralConstants");

  BoundReport r;
  r.c2_used = stein.C2;
  const double dom_factor = stein_dominant_factor(stein, ak, &r.beta_used);
  const double dom_coef = d * p.phi2 + p.phi3;
  const AdmissibilityReport adm = validate_schedule(s, pc, spec);

  if (s.xi == 0.0) {
    r.case_tag = BoundCase::kXi0;
    r.terms.push_back({"resid_steady", rho2c / (iota * g) * std::pow(a, 0.5 * delta)});
    r.terms.push_back({"stein_dominant", dom_coef * dom_factor / iota});
    r.terms.push_back({"coupling_steady", th2 * std::sqrt(a) / std::sqrt(iota * g)});
    r.terms.push_back({"stein_mid", d * p.phi12 * a / iota});
    r.terms.push_back({"transient_init",
                       (d * p.phi11 + lM / a * ev0) *
                           std::exp(-0.5 * iota * a * static_cast<double>(k))});
    const double coup_tr =
        th1 * std::sqrt(e0) * std::exp(0.5 * iota * a) *
        std::sqrt(std::max(0.0, (0.5 * a) * expdiff(kVarsigma1 * g * a, iota * a,
                                                    static_cast<double>(k))));
    r.terms.push_back({"coupling_transient", coup_tr});
    const double r1 = 0.75 * (1.0 + delta) * g * a;
    const double r2 = 0.5 * iota * a;
    const double resid_tr =
        (rho1 == 0 || e0 == 0)
            ? 0.0
            : rho1 * e0h * std::exp(0.5 * iota * a) / std::sqrt(a) * (0.25 * a) *
                  expdiff(r1, r2, static_cast<double>(k));
    r.terms.push_back({"resid_transient", resid_tr});
    r.hypotheses_ok = hyp(adm, {"alpha0_le_1", "alpha0_le_alpha_cap",
                                "xi0.alpha_le_contraction"});
  } else if (s.xi < 1.0) {
    r.case_tag = BoundCase::kXiMid;
    const double t = std::pow(static_cast<double>(k + s.K), 1.0 - s.xi);
    const double t0 = std::pow(static_cast<double>(s.K), 1.0 - s.xi);
    const double om = 1.0 - s.xi;
    r.terms.push_back(
        {"resid_steady", (8.0 * rho2c + 4.0 * rho3) / iota * std::pow(ak, 0.5 * delta)});
    r.terms.push_back({"stein_dominant", 2.0 * dom_coef * dom_factor / iota});
    r.terms.push_back(
        {"coupling_steady", 2.0 * th2 * std::sqrt(ak) / std::sqrt(iota * g)});
    r.terms.push_back({"stein_mid", 2.0 * d * p.phi12 * ak / iota});
    r.terms.push_back({"transient_init",
                       (d * p.phi11 + lM / a * ev0) *
                           std::exp(-0.5 * iota * a / om * (t - t0))});
    const double c1 = kVarsigma1 * g * a / om;
    const double c2 = iota * a / om;
    const double coup_tr =
        th1 * std::sqrt(e0) * std::exp(0.5 * iota * a) *
        std::sqrt(std::max(0.0, (0.5 * a / om) * expdiff(c1, c2, t)));
    r.terms.push_back({"coupling_transient", coup_tr});
    // (rho1/2) E0^{(1+d)/2} e^{3 d g a K^{1-xi}/(4(1-xi))} + 2 rho4 sqrt(E0),
    // times 4 e^{iota a / 2} expdiff / (2 iota - 3 gamma); exponents combined
    // per piece to dodge overflow
    const double cg = 0.75 * g * a / om;   // decay rate on (t - t0)
    const double ci = 0.5 * iota * a / om;
    const double grow = 0.75 * delta * g * a * t0 / om;
    double resid_tr = 0.0;
    {
      const double diff_scaled = expdiff(cg, ci, t - t0);  // includes 1/(ci-cg)
      const double pref = 4.0 * std::exp(0.5 * iota * a) * (ci - cg) /
                          (2.0 * iota - 3.0 * g);
      double inner = 0.0;
      if (rho1 > 0 && e0 > 0) inner += 0.5 * rho1 * e0h * std::exp(grow);
      inner += 2.0 * rho4 * std::sqrt(e0);
      resid_tr = pref * inner * diff_scaled;
    }
    r.terms.push_back({"resid_transient", std::max(0.0, resid_tr)});
    r.hypotheses_ok =
        hyp(adm, {"alpha0_le_1", "alpha0_le_alpha_cap", "xim.K_ge_mse",
                  "xim.K_ge_theta", "xim.shift_le_min1_iota3",
                  "xim.alpha0_le_contraction", "xim.transient_growth"});
  } else {
    const BoundCase c = xi1_subcase(spec, pc);
    r.case_tag = c;
    const double dk = static_cast<double>(k + s.K);
    const double kk = static_cast<double>(s.K);
    r.terms.push_back(
        {"resid_steady",
         (3.0 * rho2c * std::pow(a / (3.0 * g * a - 2.0), 0.5 * (1.0 + delta)) + rho5) *
             2.0 * a * std::pow(ak, 0.5 * delta) / (iota * a - 2.0)});
    r.terms.push_back({"stein_dominant",
                       2.0 * dom_coef * dom_factor * a / (2.0 * iota * a - 1.0)});
    r.terms.push_back(
        {"coupling_steady",
         std::sqrt(std::max(0.0, 3.0 * th2 * th2 * a * a * a /
                                     ((3.0 * g * a - 2.0) * (iota * a - 1.0)))) /
             std::sqrt(dk)});
    r.terms.push_back({"stein_mid", d * p.phi12 * a * a / ((iota * a - 1.0) * dk)});
    r.terms.push_back({"transient_init",
                       powprod(d * p.phi11 + lM / a * ev0, kk, 0.5 * iota * a, dk,
                               -0.5 * iota * a)});
    if (c == BoundCase::kXi1A) {
      const double inner =
          powprod(rho1 * e0h, kk / a, 0.75 * delta * g * a, 1.0, 0.0) +
          4.0 * rho3 * std::sqrt(e0);
      r.terms.push_back({"resid_transient",
                         powprod(inner / (2.0 * iota - 3.0 * g), kk, 0.75 * g * a,
                                 dk, -0.75 * g * a)});
      r.terms.push_back({"coupling_transient",
                         powprod(std::sqrt(th1 * th1 * e0 / (2.0 * iota - 3.0 * g)),
                                 kk, 0.75 * g * a, dk, -0.75 * g * a)});
    } else if (c == BoundCase::kXi1B) {
      const double inner =
          powprod(2.0 * rho1 * e0h, kk / a, 0.75 * delta * g * a, 1.0, 0.0) +
          8.0 * rho3 * std::sqrt(e0);
      r.terms.push_back(
          {"resid_transient",
           powprod(inner / (3.0 * g - 2.0 * iota), 2.0 * kk,
                   0.25 * (3.0 * g - 2.0 * iota) * a, 1.0, 0.0) *
               powprod(1.0, kk, 0.5 * iota * a, dk, -0.5 * iota * a)});
      r.terms.push_back(
          {"coupling_transient",
           powprod(std::sqrt(2.0 * th1 * th1 * e0 / (3.0 * g - 2.0 * iota)),
                   2.0 * kk, 0.75 * g * a, dk, -0.5 * iota * a)});
    } else {
      const double inner =
          powprod(2.0 * rho1 * e0h, kk / a, 0.75 * delta * g * a, 1.0, 0.0) +
          8.0 * rho3 * std::sqrt(e0);
      const double lg = std::log(dk);
      r.terms.push_back({"resid_transient",
                         powprod(inner * a * lg, 2.0 * kk, 0.5 * iota * a, dk,
                                 -0.5 * iota * a)});
      r.terms.push_back({"coupling_transient",
                         powprod(th1 * std::sqrt(e0 * a * lg), 2.0 * kk,
                                 0.5 * iota * a, dk, -0.5 * iota * a)});
    }
    r.hypotheses_ok =
        hyp(adm, {"alpha0_le_1", "alpha0_le_alpha_cap", "xi1.iota_v_alpha_gt_2",
                  "xi1.three_delta_gamma_alpha_gt_2", "xi1.iota_v_alpha_gt_1",
                  "xi1.three_gamma_alpha_gt_2", "xi1.varsigma1_gamma_alpha_gt_1",
                  "xi1.alpha0_le_xi1_contraction"});
  }
  for (const auto& t : r.terms) r.total += t.value;
  return r;
}

TailSandwich tail_sandwich(double a, const Vector& zeta, double w1_value,
                           const SpdMatrix& sigma) {
  if (!(a > 0)) throw ConfigError("tail_sandwich: a must be > 0");
  if (std::abs(zeta.norm() - 1.0) > 1e-9)
    throw ConfigError("tail_sandwich: zeta must be a unit vector");
  if (w1_value < 0 || w1_value >= 1.0)
    throw InvalidRho("tail_sandwich: rho = 1 - sqrt(w1) needs w1 in [0, 1), got " +
                     std::to_string(w1_value));
  const double s2 = zeta.dot(sigma.mat() * zeta);
  const double sd = std::sqrt(s2);
  TailSandwich t;
  t.rho = 1.0 - std::sqrt(w1_value);
  t.center = normal_ccdf(a / sd);
  const double mill = (1.0 - t.rho) * a / sd * normal_pdf(t.rho * a / sd);
  const double mass = w1_value > 0 ? w1_value / ((1.0 - t.rho) * a) : 0.0;
  t.width = mill + mass;
  t.lower = std::max(0.0, t.center - t.width);
  t.upper = std::min(1.0, t.center + t.width);
  t.hypothesis_ok = w1_value <= 0.5;
  return t;
}

MeanErrorBound mean_error_bound(long long k, const StepSchedule& s,
                                const SpectralConstants& spec,
                                const ProblemConstants& pc,
                                const SteinConstants& stein, double e0,
                                double ev0, std::uint64_t mc_seed) {
  if (s.xi != 1.0 || !spec.Sigma2.has_value())
    throw ConfigError("mean_error_bound: xi = 1 only");
  MeanErrorBound m;
  m.mc_seed = mc_seed;
  constexpr long long n = 1'000'000;
  RandomStream rng(mc_seed, 0x3EULL);
  const Matrix& chol = spec.Sigma2->chol();
  Vector g(spec.dim);
  double s1 = 0, s2 = 0;
  for (long long i = 0; i < n; ++i) {
    for (int j = 0; j < spec.dim; ++j) g(j) = rng.normal();
    const double v = (chol * g).norm();
    s1 += v;
    s2 += v * v;
  }
  m.e_norm = s1 / n;
  m.e_norm_stderr = std::sqrt(std::max(0.0, s2 / n - m.e_norm * m.e_norm) / n);
  const double ak = s.step(k);
  const BoundReport sa = sa_w1_bound(k, s, spec, pc, stein, e0, ev0);
  m.leading = std::sqrt(ak) * m.e_norm;
  m.higher = std::sqrt(ak) * sa.total;
  m.total = m.leading + m.higher;
  m.hypotheses_ok = sa.hypotheses_ok;
  return m;
}

FlaggedValue rec_sol_closed_form(double u0, double mu1, double mu2, double mu3,
                                 double rho1, double rho2,
                                 const StepSchedule& s, long long k) {
  const double a = s.alpha;
  const double ak = s.step(k);
  FlaggedValue out;
  if (s.xi == 0.0) {
    out.value = u0 * std::exp(-mu1 * a * k) +
                mu2 * std::exp(mu1 * a) * a *
                    expdiff(rho1 * a, mu1 * a, static_cast<double>(k)) +
                mu3 * std::pow(a, rho2) / mu1;
    out.hypotheses_ok = mu1 * a <= 1.0 + 1e-12;
  } else if (s.xi < 1.0) {
    const double om = 1.0 - s.xi;
    const double t = std::pow(static_cast<double>(k + s.K), om);
    const double t0 = std::pow(static_cast<double>(s.K), om);
    out.value = u0 * std::exp(-mu1 * a / om * (t - t0)) +
                mu2 * std::exp(mu1 * a) * (a / om) *
                    expdiff(rho1 * a / om, mu1 * a / om, t) +
                2.0 * mu3 * std::pow(ak, rho2) / mu1;
    out.hypotheses_ok =
        static_cast<double>(s.K) >= std::pow(2.0 / (mu1 * a), 1.0 / om) - 1e-12 &&
        mu1 * s.alpha0() <= 1.0 + 1e-12;
  } else {
    const double dk = static_cast<double>(k + s.K);
    const double kk = static_cast<double>(s.K);
    const double head = powprod(u0, kk, mu1 * a, dk, -mu1 * a);
    const double p = mu1 * a;
    double tail;
    if (std::abs(p - rho2) <= 1e-9 * std::max({p, rho2, 1.0})) {
      tail = std::pow(2.0, 1.0 + rho2) * mu3 * a * std::log(dk) * std::pow(ak, rho2);
    } else if (p > rho2) {
      tail = a * mu3 * std::pow(ak, rho2) / (p - rho2);
    } else {
      tail = powprod(std::pow(2.0 * a, 1.0 + rho2) * mu3 / (rho2 - p), ak, p,
                     1.0 / a, p);
    }
    out.value = head + tail;
    out.hypotheses_ok = mu1 * s.alpha0() <= 1.0 + 1e-12;
  }
  return out;
}

std::vector<ThetaProducts> theta_products(const Matrix& j, const StepSchedule& s,
                                          const std::vector<long long>& ks,
                                          double beta, const SpdMatrix& sigma_b,
                                          const SpectralConstants& spec) {
  const Eigen::Index d = j.rows();
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw ConfigError("theta_products: ks must ascend");
  if (!ks.empty() && ks.back() > 1'000'000)
    throw TooLarge("theta_products: k beyond the 1e6 cost guard");
  const bool xi1 = s.xi == 1.0;
  const Matrix& sigma_n = xi1 ? spec.Sigma2->mat() : spec.Sigma1.mat();
  const double norm_sig_v = xi1 ? spec.norm_Sigma2_V : spec.norm_Sigma1_V;
  const double iota = spec.iota_V;
  const double a = s.alpha;
  const double ratio = spec.lambda_max / spec.lambda_min;
  const double jv2 = spec.norm_J_V * spec.norm_J_V;
  const double jshift = spec.norm_J_V + 0.5 / a;

  std::vector<ThetaProducts> out;
  out.reserve(ks.size());

  // exact covariance recursion, recorded at the checkpoints
  {
    Matrix cov = Matrix::Zero(d, d);
    std::size_t ci = 0;
    for (long long k = 0; ci < ks.size(); ++k) {
      if (ks[ci] == k) {
        ThetaProducts tp;
        tp.k = k;
        tp.gap_exact = spectral_norm(cov - sigma_n);
        out.push_back(tp);
        ++ci;
        if (ci == ks.size()) break;
      }
      const Matrix m =
          Matrix::Identity(d, d) + s.step(k) * drift_matrix(s, k, j);
      cov = (m * cov * m.transpose() + s.step(k) * sigma_b.mat()).eval();
    }
  }

  // exact sum of ||Theta_i||^{2+beta} per horizon via suffix products
  for (std::size_t ci = 0; ci < ks.size(); ++ci) {
    const long long k = ks[ci];
    double sum = 0.0;
    Matrix m = Matrix::Identity(d, d);
    // i = k-1 has empty product; walking i downward multiplies on the right
    for (long long i = k - 1; i >= 0; --i) {
      if (i < k - 1) {
        const long long l = i + 1;
        m = (m * (Matrix::Identity(d, d) + s.step(l) * drift_matrix(s, l, j))).eval();
      }
      const double nrm = std::sqrt(s.step(i)) * spectral_norm(m);
      sum += std::pow(nrm, 2.0 + beta);
    }
    out[ci].sum_exact = sum;
  }

  // lemma envelopes
  for (auto& tp : out) {
    const long long k = tp.k;
    const double ak = s.step(k);
    if (s.xi == 0.0) {
      tp.sum_bound = std::pow(ratio, 1.5) * std::pow(a, 0.5 * beta) / iota;
      tp.gap_bound =
          std::sqrt(ratio) * (norm_sig_v * std::exp(-iota * a * k) +
                              jshift * jshift * norm_sig_v * a / iota);
      tp.sum_hypotheses_ok = a <= std::min(1.0, 2.0 * iota / jv2) + 1e-12;
      tp.gap_hypotheses_ok = tp.sum_hypotheses_ok;
    } else if (s.xi < 1.0) {
      const double om = 1.0 - s.xi;
      const double t = std::pow(static_cast<double>(k + s.K), om);
      const double t0 = std::pow(static_cast<double>(s.K), om);
      tp.sum_bound = 2.0 * std::pow(ratio, 1.5) * std::pow(ak, 0.5 * beta) / iota;
      tp.gap_bound = std::sqrt(ratio) *
                     (norm_sig_v * std::exp(-iota * a / om * (t - t0)) +
                      2.0 * jshift * jshift * norm_sig_v * ak / iota);
      const double shift = s.xi * std::pow(static_cast<double>(s.K), s.xi - 1.0) / (2.0 * a);
      const bool okk =
          static_cast<double>(s.K) >= std::pow(1.0 / (iota * a), 1.0 / om) - 1e-12 &&
          s.alpha0() <= std::min(1.0, 2.0 * iota / jv2) + 1e-12 &&
          shift <= std::min(1.0, iota / 3.0) + 1e-12;
      tp.sum_hypotheses_ok = okk;
      tp.gap_hypotheses_ok = okk;
    } else {
      tp.sum_bound = std::pow(ratio, 1.5) * 2.0 * a * std::pow(ak, 0.5 * beta) /
                     (2.0 * iota * a - 1.0);
      tp.gap_bound = std::sqrt(ratio) *
                     (powprod(norm_sig_v, static_cast<double>(s.K), iota * a,
                              static_cast<double>(k + s.K), -iota * a) +
                      a * jshift * jshift * norm_sig_v * ak / (iota * a - 1.0));
      const bool cap_ok =
          s.alpha0() <= 4.0 * iota / (4.0 * jv2 + 1.0 / (a * a)) + 1e-12;
      tp.sum_hypotheses_ok = iota * a > 0.5 && cap_ok;
      tp.gap_hypotheses_ok = iota * a > 1.0 && cap_ok;
    }
  }
  return out;
}

ContractionCheck contraction_check(const Matrix& j, const SpdMatrix& v,
                                   double eps1, double eps2) {
  const double iota = 1.0 / (4.0 * symmetric_eigen(v.mat()).values.maxCoeff());
  const double jv = v_operator_norm(j, v);
  const double e1_max = std::min(1.0, 2.0 * iota / (jv * jv));
  const double e2_max = std::min(1.0, iota / 3.0);
  if (eps1 < 0 || eps1 > e1_max + 1e-15 || eps2 < 0 || eps2 > e2_max + 1e-15)
    throw EpsOutOfRange("contraction_check: eps1 in [0," + std::to_string(e1_max) +
                        "], eps2 in [0," + std::to_string(e2_max) + "]");
  const Eigen::Index d = j.rows();
  const Matrix m = Matrix::Identity(d, d) + eps1 * j +
                   (eps1 * eps2) * Matrix::Identity(d, d);
  ContractionCheck c;
  const double nv = v_operator_norm(m, v);
  c.lhs = nv * nv;
  c.rhs = 1.0 - iota * eps1;
  c.holds = c.lhs <= c.rhs + 1e-12;
  return c;
}

ContractionCheck contraction_check_xi1(const Matrix& j, const SpdMatrix& v,
                                       double alpha, double eps) {
  const double iota = 1.0 / (4.0 * symmetric_eigen(v.mat()).values.maxCoeff());
  if (!(2.0 * iota * alpha >= 1.0))
    throw EpsOutOfRange("contraction_check_xi1: needs 2 iota_V alpha >= 1");
  const double jv = v_operator_norm(j, v);
  const double e_max = 4.0 * iota / (4.0 * jv * jv + 1.0 / (alpha * alpha));
  if (eps < 0 || eps > e_max + 1e-15)
    throw EpsOutOfRange("contraction_check_xi1: eps in [0," +
                        std::to_string(e_max) + "]");
  const Eigen::Index d = j.rows();
  const Matrix m = Matrix::Identity(d, d) + eps * j +
                   (eps * 0.5 / alpha) * Matrix::Identity(d, d);
  ContractionCheck c;
  const double nv = v_operator_norm(m, v);
  c.lhs = nv * nv;
  c.rhs = 1.0 - iota * eps;
  c.holds = c.lhs <= c.rhs + 1e-12;
  return c;
}

ContractionCheck contraction_check_symmetric(const Matrix& j,
                                             const StepSchedule& s, long long l) {
  const EigenDecomposition ed = symmetric_eigen(j);
  if (!(ed.values.maxCoeff() < 0))
    throw EpsOutOfRange("contraction_check_symmetric: J must be negative definite");
  const double iota_j = -ed.values.maxCoeff();
  const double al = s.step(l);
  const Eigen::Index d = j.rows();
  const Matrix m = Matrix::Identity(d, d) + al * drift_matrix(s, l, j);
  ContractionCheck c;
  const double n2 = spectral_norm(m);
  c.lhs = n2 * n2;
  if (s.xi < 1.0) {
    if (!(iota_j >= 2.0 * s.xi / (s.alpha * std::pow(static_cast<double>(s.K), 1.0 - s.xi))) ||
        !(al <= 8.0 * iota_j / 9.0))
      throw EpsOutOfRange("contraction_check_symmetric: step-size conditions");
    c.rhs = 1.0 - iota_j * al;
  } else {
    const double shifted = iota_j - 0.5 / s.alpha;
    if (!(al <= shifted / 2.0))
      throw EpsOutOfRange("contraction_check_symmetric: alpha_l too large");
    c.rhs = 1.0 - 1.5 * shifted * al;
  }
  c.holds = c.lhs <= c.rhs + 1e-12;
  return c;
}

FlaggedValue clt_rate(long long k, const StepSchedule& s, double c) {
  FlaggedValue out;
  const double dk = static_cast<double>(k + s.K);
  if (s.xi == 0.0) {
    out.value = c * std::sqrt(s.alpha) * std::log(1.0 / s.alpha);
    out.hypotheses_ok = s.alpha < 1.0;
  } else if (s.xi < 1.0) {
    out.value = c * std::log(dk) / std::pow(dk, 0.5 * s.xi);
    out.hypotheses_ok = true;
  } else {
    out.value = c * std::log(dk) / std::sqrt(dk);
    out.hypotheses_ok = s.alpha >= 1.0 &&
                        static_cast<double>(s.K) >= 2.0 * s.alpha - 1.0;
  }
  return out;
}

}  // namespace douglab
