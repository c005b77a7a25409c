#include "douglab/schedule.hpp"

#include <cmath>

namespace douglab {

StepSchedule::StepSchedule(double alpha_, long long K_, double xi_)
    : alpha(alpha_), K(K_), xi(xi_) {
  if (!(alpha > 0)) throw ConfigError("StepSchedule: alpha must be > 0");
  if (K < 1) throw ConfigError("StepSchedule: K must be >= 1");
  if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("StepSchedule: xi in [0,1]");
  if (alpha0() > 1.0 + 1e-15)
    throw ConfigError("StepSchedule: alpha_0 = " + std::to_string(alpha0()) +
                      " exceeds 1 (Assumption 4)");
}

double StepSchedule::step(long long k) const {
  return alpha / std::pow(static_cast<double>(k + K), xi);
}

Matrix drift_matrix(const StepSchedule& s, long long k, const Matrix& j) {
  if (s.xi == 0.0) return j;
  const double shift =
      s.xi / (2.0 * s.alpha * std::pow(static_cast<double>(k + s.K), 1.0 - s.xi));
  return j + shift * Matrix::Identity(j.rows(), j.cols());
}

Matrix limit_drift(const StepSchedule& s, const Matrix& j) {
  if (s.xi < 1.0) return j;
  Matrix shifted = j + (1.0 / (2.0 * s.alpha)) * Matrix::Identity(j.rows(), j.cols());
  if (!is_hurwitz(shifted))
    throw NotHurwitzAfterShift(
        "limit_drift: J + I/(2 alpha) has an eigenvalue with nonnegative real "
        "part (alpha = " + std::to_string(s.alpha) + ")");
  return shifted;
}

namespace {

void push_le(AdmissibilityReport& r, const std::string& name, double actual,
             double required) {
  r.entries.push_back({name, required, actual, actual <= required + 1e-12});
}

void push_gt(AdmissibilityReport& r, const std::string& name, double actual,
             double required) {
  r.entries.push_back({name, required, actual, actual > required});
}

void push_ge(AdmissibilityReport& r, const std::string& name, double actual,
             double required) {
  r.entries.push_back({name, required, actual, actual >= required - 1e-12});
}

}  // namespace

bool AdmissibilityReport::all_satisfied() const {
  for (const auto& e : entries)
    if (!e.satisfied) return false;
  return true;
}

const AdmissibilityEntry* AdmissibilityReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

AdmissibilityReport validate_schedule(const StepSchedule& s,
                                      const ProblemConstants& c,
                                      const SpectralConstants& spec) {
  AdmissibilityReport r;
  const double a = s.alpha;
  const double a0 = s.alpha0();
  const double iota = spec.iota_V;
  const double jv2 = spec.norm_J_V * spec.norm_J_V;

  push_le(r, "alpha0_le_1", a0, 1.0);
  push_le(r, "alpha0_le_alpha_cap", a0, c.alpha0_cap);

  if (s.xi == 0.0) {
    push_le(r, "xi0.alpha_le_contraction", a, 2.0 * iota / jv2);
  } else if (s.xi < 1.0) {
    const double ex = 1.0 / (1.0 - s.xi);
    push_ge(r, "xim.K_ge_mse", static_cast<double>(s.K),
            std::pow(1.0 / (kVarsigma1 * c.gamma * a), ex));
    push_ge(r, "xim.K_ge_theta", static_cast<double>(s.K),
            std::pow(1.0 / (iota * a), ex));
    const double shift = s.xi * std::pow(static_cast<double>(s.K), s.xi - 1.0) / (2.0 * a);
    push_le(r, "xim.shift_le_min1_iota3", shift, std::min(1.0, iota / 3.0));
    push_le(r, "xim.alpha0_le_contraction", a0, std::min(1.0, 2.0 * iota / jv2));
    const double growth = std::exp(-0.75 * c.delta * c.gamma * a *
                                   std::pow(static_cast<double>(s.K), 1.0 - s.xi) /
                                   (1.0 - s.xi));
    push_le(r, "xim.transient_growth", growth, std::sqrt(a0));
  } else {
    push_gt(r, "xi1.iota_v_alpha_gt_2", iota * a, 2.0);
    push_gt(r, "xi1.three_delta_gamma_alpha_gt_2", 3.0 * c.delta * c.gamma * a, 2.0);
    push_gt(r, "xi1.iota_v_alpha_gt_1", iota * a, 1.0);
    push_gt(r, "xi1.three_gamma_alpha_gt_2", 3.0 * c.gamma * a, 2.0);
    push_gt(r, "xi1.varsigma1_gamma_alpha_gt_1", kVarsigma1 * c.gamma * a, 1.0);
    push_le(r, "xi1.alpha0_le_xi1_contraction", a0,
            4.0 * iota / (4.0 * jv2 + 1.0 / (a * a)));
  }
  return r;
}

std::optional<long long> find_min_K(double alpha, double xi,
                                    const ProblemConstants& c,
                                    const SpectralConstants& spec,
                                    long long k_max) {
  if (!(xi > 0.0 && xi <= 1.0))
    throw ConfigError("find_min_K: xi must be in (0, 1]");
  for (long long K = 1; K <= k_max; ++K) {
    if (alpha / std::pow(static_cast<double>(K), xi) > 1.0) continue;
    StepSchedule s(alpha, K, xi);
    if (validate_schedule(s, c, spec).all_satisfied()) return K;
  }
  return std::nullopt;
}

}  // namespace douglab
