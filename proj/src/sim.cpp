#include "douglab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <thread>

namespace douglab {
namespace {

std::vector<double> step_sizes(const StepSchedule& s, long long horizon) {
  std::vector<double> a(static_cast<std::size_t>(horizon) + 1);
  for (long long k = 0; k <= horizon; ++k) a[k] = s.step(k);
  return a;
}

std::vector<double> drift_shifts(const StepSchedule& s, long long horizon) {
  // J_k = J + shift_k I
  std::vector<double> sh(static_cast<std::size_t>(horizon) + 1, 0.0);
  if (s.xi > 0.0) {
    for (long long k = 0; k <= horizon; ++k)
      sh[k] = s.xi / (2.0 * s.alpha *
                      std::pow(static_cast<double>(k + s.K), 1.0 - s.xi));
  }
  return sh;
}

void check_guard_sq(double n2, long long k) {
  if (!(n2 <= kDivergenceGuard * kDivergenceGuard) || !std::isfinite(n2))
    throw Diverged("trajectory escaped the guard at k = " + std::to_string(k), k);
}

double dist_sq(const Vector& x, const Vector& y) {
  double n2 = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double e = x(i) - y(i);
    n2 += e * e;
  }
  return n2;
}

// scalar additive draw mirroring sample_additive_into
double draw_additive_1d(const NoiseModel& nm, double chol00, RandomStream& rng) {
  double u;
  switch (nm.additive_kind) {
    case AdditiveKind::kGaussian: u = rng.normal(); break;
    case AdditiveKind::kUniformCube:
      u = rng.uniform(-1.7320508075688772935, 1.7320508075688772935);
      break;
    case AdditiveKind::kRademacherProduct: u = rng.rademacher(); break;
    case AdditiveKind::kCenteredExponential: u = rng.centered_exponential(); break;
    default: u = 0; break;
  }
  double b = chol00 * u;
  if (nm.additive_scale != 1.0) b *= nm.additive_scale;
  return b;
}

double eval_operator_1d(const Operator& op, double x) {
  const double j = op.jacobian(0, 0);
  const double xs = op.x_star(0);
  double f = j * x;
  f -= j * xs;
  switch (op.residual_kind) {
    case ResidualKind::kNone:
      break;
    case ResidualKind::kSaturatingPower: {
      const double e = x - xs;
      const double r = std::min(std::abs(e), op.saturation_s);
      f += op.R1 * std::pow(r, op.delta) * e;
      break;
    }
    case ResidualKind::kLogcoshGradient:
      f += op.logcosh_eps * (x - std::tanh(x));
      break;
  }
  return f;
}

}  // namespace

CheckpointPlan CheckpointPlan::geometric(long long K, long long horizon,
                                         double factor) {
  if (horizon < 1) throw ConfigError("checkpoint plan: horizon must be >= 1");
  if (!(factor > 1.0)) throw ConfigError("checkpoint plan: factor must be > 1");
  std::vector<long long> ks;
  double v = static_cast<double>(K);
  while (true) {
    const long long k = static_cast<long long>(std::ceil(v));
    if (k >= horizon) break;
    if (ks.empty() || k > ks.back()) ks.push_back(k);
    v *= factor;
  }
  ks.push_back(horizon);
  return explicit_list(std::move(ks));
}

CheckpointPlan CheckpointPlan::explicit_list(std::vector<long long> ks) {
  if (ks.empty()) throw ConfigError("checkpoint plan: empty");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 0) throw ConfigError("checkpoint plan: negative index");
    if (i > 0 && ks[i] <= ks[i - 1])
      throw ConfigError("checkpoint plan: indices must be strictly increasing");
  }
  CheckpointPlan p;
  p.indices = std::move(ks);
  return p;
}

Matrix run_sa(const Problem& p, const StepSchedule& s, const Vector& x0,
              const CheckpointPlan& plan, RandomStream& rng) {
  const Eigen::Index d = p.dim();
  if (x0.size() != d) throw DimensionMismatch("run_sa: x0 dim");
  const long long horizon = plan.horizon();
  const auto alphas = step_sizes(s, horizon);
  Matrix out(plan.size(), d);

  if (d == 1) {  // scalar fast path, same arithmetic as the generic body
    const double xs = p.op.x_star(0);
    const double chol00 = p.noise.sigma_b.chol()(0, 0);
    double x = x0(0);
    std::size_t cp = 0;
    for (long long k = 0; k <= horizon; ++k) {
      if (cp < plan.size() && plan.indices[cp] == k) {
        out(static_cast<Eigen::Index>(cp), 0) =
            (x - xs) * (1.0 / std::sqrt(alphas[k]));
        ++cp;
      }
      if (k == horizon) break;
      const double f = eval_operator_1d(p.op, x);
      const double b = draw_additive_1d(p.noise, chol00, rng);
      const double am =
          p.noise.multiplicative_scale * sample_innovation(p.noise, rng);
      x += alphas[k] * (f + am * (x - xs) + b);
      const double e = x - xs;
      check_guard_sq(e * e, k + 1);
    }
    return out;
  }

  Vector x = x0;
  Vector f(d), u(d), b(d);
  std::size_t cp = 0;
  for (long long k = 0; k <= horizon; ++k) {
    if (cp < plan.size() && plan.indices[cp] == k) {
      const double inv = 1.0 / std::sqrt(alphas[k]);
      for (Eigen::Index i = 0; i < d; ++i)
        out(static_cast<Eigen::Index>(cp), i) = (x(i) - p.op.x_star(i)) * inv;
      ++cp;
    }
    if (k == horizon) break;
    eval_operator_into(p.op, x, f);
    sample_additive_into(p.noise, rng, u, b);
    const double am =
        p.noise.multiplicative_scale * sample_innovation(p.noise, rng);
    const double ak = alphas[k];
    for (Eigen::Index i = 0; i < d; ++i)
      x(i) += ak * (f(i) + am * (x(i) - p.op.x_star(i)) + b(i));
    check_guard_sq(dist_sq(x, p.op.x_star), k + 1);
  }
  return out;
}

Matrix run_doug(const Matrix& j, const StepSchedule& s, const NoiseModel& nm,
                const CheckpointPlan& plan, RandomStream& rng) {
  if (nm.multiplicative_kind != MultiplicativeKind::kNone)
    throw ConfigError("run_doug: noise must be additive only");
  if (!is_hurwitz(j)) throw NotHurwitzAfterShift("run_doug: J not Hurwitz");
  if (s.xi == 1.0) (void)limit_drift(s, j);  // throws when the shift breaks Hurwitz
  const Eigen::Index d = j.rows();
  const long long horizon = plan.horizon();
  const auto alphas = step_sizes(s, horizon);
  const auto shifts = drift_shifts(s, horizon);
  Matrix out(plan.size(), d);

  if (d == 1) {
    const double jl = j(0, 0);
    const double chol00 = nm.sigma_b.chol()(0, 0);
    double z = 0;
    std::size_t cp = 0;
    for (long long k = 0; k <= horizon; ++k) {
      if (cp < plan.size() && plan.indices[cp] == k) {
        out(static_cast<Eigen::Index>(cp), 0) = z;
        ++cp;
      }
      if (k == horizon) break;
      const double b = draw_additive_1d(nm, chol00, rng);
      const double jz = jl * z;
      z += alphas[k] * (jz + shifts[k] * z) + std::sqrt(alphas[k]) * b;
      check_guard_sq(z * z, k + 1);
    }
    return out;
  }

  Vector z = Vector::Zero(d);
  Vector jz(d), u(d), b(d);
  std::size_t cp = 0;
  for (long long k = 0; k <= horizon; ++k) {
    if (cp < plan.size() && plan.indices[cp] == k) {
      for (Eigen::Index i = 0; i < d; ++i)
        out(static_cast<Eigen::Index>(cp), i) = z(i);
      ++cp;
    }
    if (k == horizon) break;
    sample_additive_into(nm, rng, u, b);
    jz.noalias() = j * z;
    const double ak = alphas[k];
    const double sak = std::sqrt(ak);
    const double sh = shifts[k];
    for (Eigen::Index i = 0; i < d; ++i)
      z(i) += ak * (jz(i) + sh * z(i)) + sak * b(i);
    check_guard_sq(z.squaredNorm(), k + 1);
  }
  return out;
}

CoupledTriples run_coupled(const Problem& p, const StepSchedule& s,
                           const Vector& x0, const CheckpointPlan& plan,
                           RandomStream& rng) {
  const Eigen::Index d = p.dim();
  if (x0.size() != d) throw DimensionMismatch("run_coupled: x0 dim");
  const Matrix& j = p.op.jacobian;
  if (s.xi == 1.0) (void)limit_drift(s, j);
  const long long horizon = plan.horizon();
  const auto alphas = step_sizes(s, horizon);
  const auto shifts = drift_shifts(s, horizon);

  CoupledTriples out;
  out.y.resize(plan.size(), d);
  out.zhat.resize(plan.size(), d);
  out.z.resize(plan.size(), d);

  if (d == 1) {
    const double xs = p.op.x_star(0);
    const double jl = j(0, 0);
    const double chol00 = p.noise.sigma_b.chol()(0, 0);
    double x = x0(0), zh = 0, z = 0;
    std::size_t cp = 0;
    for (long long k = 0; k <= horizon; ++k) {
      if (cp < plan.size() && plan.indices[cp] == k) {
        out.y(static_cast<Eigen::Index>(cp), 0) =
            (x - xs) * (1.0 / std::sqrt(alphas[k]));
        out.zhat(static_cast<Eigen::Index>(cp), 0) = zh;
        out.z(static_cast<Eigen::Index>(cp), 0) = z;
        ++cp;
      }
      if (k == horizon) break;
      const double ak = alphas[k];
      const double sak = std::sqrt(ak);
      const double sh = shifts[k];
      const double b = draw_additive_1d(p.noise, chol00, rng);
      const double am =
          p.noise.multiplicative_scale * sample_innovation(p.noise, rng);
      const double a = am * (x - xs);
      const double f = eval_operator_1d(p.op, x);
      const double jzh = jl * zh;
      const double jz = jl * z;
      x += ak * (f + a + b);
      zh += ak * (jzh + sh * zh) + sak * (a + b);
      z += ak * (jz + sh * z) + sak * b;
      const double e = x - xs;
      check_guard_sq(e * e, k + 1);
      check_guard_sq(zh * zh, k + 1);
    }
    return out;
  }

  Vector x = x0;
  Vector zh = Vector::Zero(d), z = Vector::Zero(d);
  Vector f(d), jzh(d), jz(d), a(d), u(d), b(d);
  std::size_t cp = 0;
  for (long long k = 0; k <= horizon; ++k) {
    if (cp < plan.size() && plan.indices[cp] == k) {
      const double inv = 1.0 / std::sqrt(alphas[k]);
      for (Eigen::Index i = 0; i < d; ++i) {
        out.y(static_cast<Eigen::Index>(cp), i) = (x(i) - p.op.x_star(i)) * inv;
        out.zhat(static_cast<Eigen::Index>(cp), i) = zh(i);
        out.z(static_cast<Eigen::Index>(cp), i) = z(i);
      }
      ++cp;
    }
    if (k == horizon) break;
    const double ak = alphas[k];
    const double sak = std::sqrt(ak);
    const double sh = shifts[k];
    sample_additive_into(p.noise, rng, u, b);
    const double am =
        p.noise.multiplicative_scale * sample_innovation(p.noise, rng);
    // A is evaluated at the SA state before any of the three updates
    for (Eigen::Index i = 0; i < d; ++i) a(i) = am * (x(i) - p.op.x_star(i));

    eval_operator_into(p.op, x, f);
    jzh.noalias() = j * zh;
    jz.noalias() = j * z;
    for (Eigen::Index i = 0; i < d; ++i) {
      x(i) += ak * (f(i) + a(i) + b(i));
      zh(i) += ak * (jzh(i) + sh * zh(i)) + sak * (a(i) + b(i));
      z(i) += ak * (jz(i) + sh * z(i)) + sak * b(i);
    }

    check_guard_sq(dist_sq(x, p.op.x_star), k + 1);
    check_guard_sq(zh.squaredNorm(), k + 1);
  }
  return out;
}

Matrix run_averaging(const NoiseModel& nm, const StepSchedule& s,
                     const Vector& x0, const CheckpointPlan& plan,
                     RandomStream& rng) {
  if (nm.multiplicative_kind != MultiplicativeKind::kNone)
    throw ConfigError("run_averaging: noise must be additive only");
  const Eigen::Index d = nm.dim();
  if (x0.size() != d) throw DimensionMismatch("run_averaging: x0 dim");
  const long long horizon = plan.horizon();
  const auto alphas = step_sizes(s, horizon);
  Matrix out(plan.size(), d);

  if (d == 1) {
    const double chol00 = nm.sigma_b.chol()(0, 0);
    double x = x0(0);
    std::size_t cp = 0;
    for (long long k = 0; k <= horizon; ++k) {
      if (cp < plan.size() && plan.indices[cp] == k) {
        out(static_cast<Eigen::Index>(cp), 0) = x * (1.0 / std::sqrt(alphas[k]));
        ++cp;
      }
      if (k == horizon) break;
      const double b = draw_additive_1d(nm, chol00, rng);
      const double ak = alphas[k];
      x = (1.0 - ak) * x + ak * b;
    }
    return out;
  }

  Vector x = x0;
  Vector u(d), b(d);
  std::size_t cp = 0;
  for (long long k = 0; k <= horizon; ++k) {
    if (cp < plan.size() && plan.indices[cp] == k) {
      const double inv = 1.0 / std::sqrt(alphas[k]);
      for (Eigen::Index i = 0; i < d; ++i)
        out(static_cast<Eigen::Index>(cp), i) = x(i) * inv;
      ++cp;
    }
    if (k == horizon) break;
    sample_additive_into(nm, rng, u, b);
    const double ak = alphas[k];
    for (Eigen::Index i = 0; i < d; ++i)
      x(i) = (1.0 - ak) * x(i) + ak * b(i);
  }
  return out;
}

TrajectoryBatch monte_carlo(const SimSpec& spec, long long replicas,
                            std::uint64_t master_seed, int threads) {
  if (replicas < 1) throw ConfigError("monte_carlo: replicas must be >= 1");
  const int d = static_cast<int>(spec.problem.dim());
  const std::size_t ncp = spec.plan.size();

  TrajectoryBatch b;
  b.checkpoints = spec.plan;
  b.replicas = replicas;
  b.dim = d;
  b.master_seed = master_seed;
  b.diverged.assign(replicas, 0);
  b.first_bad_index.assign(replicas, -1);
  b.alpha_at.resize(ncp);
  for (std::size_t i = 0; i < ncp; ++i)
    b.alpha_at[i] = spec.schedule.step(spec.plan.indices[i]);

  const bool has_y = spec.process != Process::kDoug;
  const bool has_zhat = spec.process == Process::kCoupled;
  const bool has_z =
      spec.process == Process::kCoupled || spec.process == Process::kDoug;
  const std::size_t slab = static_cast<std::size_t>(replicas) * ncp * d;
  if (has_y) b.y.assign(slab, 0.0);
  if (has_zhat) b.zhat.assign(slab, 0.0);
  if (has_z) b.z.assign(slab, 0.0);

  // engine preconditions checked once, not per replica
  {
    RandomStream probe(master_seed, ~0ULL);
    if (spec.process == Process::kDoug || spec.process == Process::kCoupled) {
      if (!is_hurwitz(spec.problem.op.jacobian))
        throw NotHurwitzAfterShift("monte_carlo: J not Hurwitz");
      if (spec.schedule.xi == 1.0)
        (void)limit_drift(spec.schedule, spec.problem.op.jacobian);
    }
  }

  // per-checkpoint rows of the (column-major) engine output copied
  // element-wise into the replica-major slab
  auto copy_rows = [&](std::vector<double>& dst, const Matrix& src, long long r) {
    for (std::size_t c = 0; c < ncp; ++c) {
      double* out = b.row(dst, r, c);
      for (int i = 0; i < d; ++i) out[i] = src(static_cast<Eigen::Index>(c), i);
    }
  };

  auto worker = [&](long long r_lo, long long r_hi) {
    for (long long r = r_lo; r < r_hi; ++r) {
      RandomStream rng(master_seed, static_cast<std::uint64_t>(r));
      try {
        switch (spec.process) {
          case Process::kSa: {
            copy_rows(b.y,
                      run_sa(spec.problem, spec.schedule, spec.x0, spec.plan, rng),
                      r);
            break;
          }
          case Process::kCoupled: {
            const CoupledTriples t =
                run_coupled(spec.problem, spec.schedule, spec.x0, spec.plan, rng);
            copy_rows(b.y, t.y, r);
            copy_rows(b.zhat, t.zhat, r);
            copy_rows(b.z, t.z, r);
            break;
          }
          case Process::kDoug: {
            copy_rows(b.z,
                      run_doug(spec.problem.op.jacobian, spec.schedule,
                               spec.problem.noise, spec.plan, rng),
                      r);
            break;
          }
          case Process::kAveraging: {
            copy_rows(b.y,
                      run_averaging(spec.problem.noise, spec.schedule, spec.x0,
                                    spec.plan, rng),
                      r);
            break;
          }
        }
      } catch (const Diverged& dv) {
        b.diverged[r] = 1;
        b.first_bad_index[r] = dv.first_bad_index;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t c = 0; c < ncp; ++c) {
          if (has_y) std::fill_n(b.row(b.y, r, c), d, nan);
          if (has_zhat) std::fill_n(b.row(b.zhat, r, c), d, nan);
          if (has_z) std::fill_n(b.row(b.z, r, c), d, nan);
        }
      }
    }
  };

  const int nt = std::max(1, threads);
  if (nt == 1 || replicas < 2 * nt) {
    worker(0, replicas);
  } else {
    std::vector<std::thread> pool;
    const long long chunk = (replicas + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      const long long lo = t * chunk;
      const long long hi = std::min<long long>(replicas, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  b.n_diverged = std::count(b.diverged.begin(), b.diverged.end(), 1);
  if (b.n_diverged * 100 > replicas)
    throw TooManyDiverged("monte_carlo: " + std::to_string(b.n_diverged) +
                          " of " + std::to_string(replicas) +
                          " replicas diverged");
  return b;
}

namespace {

long long live_count(const TrajectoryBatch& b) {
  return b.replicas - b.n_diverged;
}

}  // namespace

Vector batch_mean(const TrajectoryBatch& b, const std::vector<double>& a,
                  std::size_t cp) {
  Vector m = Vector::Zero(b.dim);
  for (long long r = 0; r < b.replicas; ++r) {
    if (b.diverged[r]) continue;
    m += Eigen::Map<const Vector>(b.row(a, r, cp), b.dim);
  }
  return m / static_cast<double>(live_count(b));
}

Matrix batch_cov(const TrajectoryBatch& b, const std::vector<double>& a,
                 std::size_t cp) {
  const Vector m = batch_mean(b, a, cp);
  Matrix c = Matrix::Zero(b.dim, b.dim);
  for (long long r = 0; r < b.replicas; ++r) {
    if (b.diverged[r]) continue;
    const Vector v = Eigen::Map<const Vector>(b.row(a, r, cp), b.dim) - m;
    c += v * v.transpose();
  }
  const long long n = live_count(b);
  return c / static_cast<double>(n > 1 ? n - 1 : 1);
}

double batch_mse(const TrajectoryBatch& b, std::size_t cp) {
  double s = 0;
  for (long long r = 0; r < b.replicas; ++r) {
    if (b.diverged[r]) continue;
    s += Eigen::Map<const Vector>(b.row(b.y, r, cp), b.dim).squaredNorm();
  }
  return b.alpha_at[cp] * s / static_cast<double>(live_count(b));
}

double batch_coupling_err(const TrajectoryBatch& b, std::size_t cp) {
  double s = 0;
  for (long long r = 0; r < b.replicas; ++r) {
    if (b.diverged[r]) continue;
    const Vector dz = Eigen::Map<const Vector>(b.row(b.z, r, cp), b.dim) -
                      Eigen::Map<const Vector>(b.row(b.zhat, r, cp), b.dim);
    s += dz.squaredNorm();
  }
  return s / static_cast<double>(live_count(b));
}

Matrix batch_slice(const TrajectoryBatch& b, const std::vector<double>& a,
                   std::size_t cp) {
  Matrix out(live_count(b), b.dim);
  long long i = 0;
  for (long long r = 0; r < b.replicas; ++r) {
    if (b.diverged[r]) continue;
    out.row(i++) = Eigen::Map<const Vector>(b.row(a, r, cp), b.dim).transpose();
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'D', 'O', 'U', 'G', 'L', 'A', 'B', '1'};

template <typename T>
void put(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
  T v;
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_batch(const TrajectoryBatch& b, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("write_batch: cannot open " + path);
  f.write(kMagic, 8);
  put<std::uint32_t>(f, 1);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(b.dim));
  put<std::uint64_t>(f, static_cast<std::uint64_t>(b.replicas));
  put<std::uint64_t>(f, static_cast<std::uint64_t>(b.checkpoints.size()));
  put<std::uint8_t>(f, b.zhat.empty() ? 0 : 1);
  put<std::uint8_t>(f, b.z.empty() ? 0 : 1);
  put<std::uint8_t>(f, b.y.empty() ? 0 : 1);
  for (int i = 0; i < 5; ++i) put<std::uint8_t>(f, 0);
  put<std::uint64_t>(f, b.master_seed);
  for (long long k : b.checkpoints.indices) put<std::int64_t>(f, k);
  for (double a : b.alpha_at) put<double>(f, a);
  f.write(reinterpret_cast<const char*>(b.diverged.data()), b.diverged.size());
  auto dump = [&](const std::vector<double>& a) {
    if (!a.empty())
      f.write(reinterpret_cast<const char*>(a.data()),
              static_cast<std::streamsize>(a.size() * sizeof(double)));
  };
  dump(b.y);
  dump(b.zhat);
  dump(b.z);
}

TrajectoryBatch read_batch(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("read_batch: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("read_batch: bad magic in " + path);
  const auto version = get<std::uint32_t>(f);
  if (version != 1) throw ConfigError("read_batch: unknown version");
  TrajectoryBatch b;
  b.dim = static_cast<int>(get<std::uint32_t>(f));
  b.replicas = static_cast<long long>(get<std::uint64_t>(f));
  const auto ncp = get<std::uint64_t>(f);
  const bool has_zhat = get<std::uint8_t>(f) != 0;
  const bool has_z = get<std::uint8_t>(f) != 0;
  const bool has_y = get<std::uint8_t>(f) != 0;
  for (int i = 0; i < 5; ++i) (void)get<std::uint8_t>(f);
  b.master_seed = get<std::uint64_t>(f);
  std::vector<long long> ks(ncp);
  for (auto& k : ks) k = static_cast<long long>(get<std::int64_t>(f));
  b.checkpoints = CheckpointPlan::explicit_list(std::move(ks));
  b.alpha_at.resize(ncp);
  for (auto& a : b.alpha_at) a = get<double>(f);
  b.diverged.resize(b.replicas);
  f.read(reinterpret_cast<char*>(b.diverged.data()), b.replicas);
  b.first_bad_index.assign(b.replicas, -1);
  const std::size_t slab = static_cast<std::size_t>(b.replicas) * ncp * b.dim;
  auto load = [&](std::vector<double>& a, bool present) {
    if (!present) return;
    a.resize(slab);
    f.read(reinterpret_cast<char*>(a.data()),
           static_cast<std::streamsize>(slab * sizeof(double)));
  };
  load(b.y, has_y);
  load(b.zhat, has_zhat);
  load(b.z, has_z);
  if (!f) throw ConfigError("read_batch: truncated file " + path);
  b.n_diverged = std::count(b.diverged.begin(), b.diverged.end(), 1);
  return b;
}

void write_batch_csv(const TrajectoryBatch& b, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_batch_csv: cannot open " + path);
  std::fprintf(f, "replica,k,alpha_k,series,component,value\n");
  auto emit = [&](const char* name, const std::vector<double>& a) {
    if (a.empty()) return;
    for (long long r = 0; r < b.replicas; ++r)
      for (std::size_t c = 0; c < b.checkpoints.size(); ++c)
        for (int i = 0; i < b.dim; ++i)
          std::fprintf(f, "%lld,%lld,%.17g,%s,%d,%.17g\n", r,
                       b.checkpoints.indices[c], b.alpha_at[c], name, i,
                       b.row(a, r, c)[i]);
  };
  emit("y", b.y);
  emit("zhat", b.zhat);
  emit("z", b.z);
  std::fclose(f);
}

}  // namespace douglab
