#include "douglab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace douglab {
namespace {

using json = nlohmann::ordered_json;

// auxiliary stream id ranges, disjoint from replica ids
constexpr std::uint64_t kTargetStream = 1ULL << 32;
constexpr std::uint64_t kFloorAStream = 2ULL << 32;
constexpr std::uint64_t kFloorBStream = 3ULL << 32;
constexpr std::uint64_t kSlicedStream = 4ULL << 32;

const char* w1_method_str(W1Method m) {
  switch (m) {
    case W1Method::kExact1d: return "exact_1d";
    case W1Method::kExactMatching: return "exact_matching";
    case W1Method::kSliced: return "sliced";
  }
  return "exact_1d";
}

W1Estimate measure(const ExperimentConfig& c, const SampleSet& cloud,
                   const SampleSet& target, std::size_t cp) {
  const std::uint64_t boot_seed = c.seed ^ (0x9E3779B97F4A7C15ULL * (cp + 1));
  switch (c.w1.method) {
    case W1Method::kExact1d:
      return w1_1d(cloud, target, c.w1.bootstrap, boot_seed);
    case W1Method::kExactMatching: {
      const long long n = std::min<long long>(cloud.rows(), target.rows());
      return w1_exact_matching(cloud.topRows(n), target.topRows(n),
                               c.w1.bootstrap, boot_seed);
    }
    case W1Method::kSliced: {
      RandomStream rng(c.seed, kSlicedStream + cp);
      return w1_sliced(cloud, target, c.w1.n_projections, rng, c.w1.bootstrap);
    }
  }
  throw ConfigError("w1: unknown method");
}

double fmt_guard(double v) { return std::isfinite(v) ? v : 0.0; }

json bound_report_to_json(const BoundReport& r) {
  json j;
  switch (r.case_tag) {
    case BoundCase::kXi0: j["case"] = "xi0"; break;
    case BoundCase::kXiMid: j["case"] = "xi_mid"; break;
    case BoundCase::kXi1A: j["case"] = "xi1_a"; break;
    case BoundCase::kXi1B: j["case"] = "xi1_b"; break;
    case BoundCase::kXi1C: j["case"] = "xi1_c"; break;
  }
  json terms = json::array();
  for (const auto& t : r.terms) {
    json jt;
    jt["label"] = t.label;
    jt["value"] = t.value;
    terms.push_back(jt);
  }
  j["terms"] = terms;
  j["total"] = r.total;
  j["hypotheses_ok"] = r.hypotheses_ok;
  j["beta_used"] = r.beta_used;
  j["C2_used"] = r.c2_used;
  return j;
}

}  // namespace

TrajectoryBatch run_batch(const ExperimentConfig& c) {
  SimSpec spec{c.process, c.problem, c.schedule, c.x0, c.plan()};
  return monte_carlo(spec, c.replicas, c.seed, resolve_threads(c.threads));
}

std::vector<SummaryRow> summarize(const TrajectoryBatch& b, Series series) {
  const std::vector<double>* a = &b.y;
  if (series == Series::kZhat) a = &b.zhat;
  if (series == Series::kZ) a = &b.z;
  if (a->empty()) throw ConfigError("summarize: series not present in batch");
  std::vector<SummaryRow> rows;
  rows.reserve(b.checkpoints.size());
  for (std::size_t cp = 0; cp < b.checkpoints.size(); ++cp) {
    SummaryRow r;
    r.k = b.checkpoints.indices[cp];
    r.alpha_k = b.alpha_at[cp];
    r.mean = batch_mean(b, *a, cp);
    r.cov = batch_cov(b, *a, cp);
    double m2 = 0;
    long long n = 0;
    for (long long rep = 0; rep < b.replicas; ++rep) {
      if (b.diverged[rep]) continue;
      m2 += Eigen::Map<const Vector>(b.row(*a, rep, cp), b.dim).squaredNorm();
      ++n;
    }
    m2 /= static_cast<double>(n);
    // y-type series hold (x - x*)/sqrt(alpha_k): undo the rescale for the MSE
    r.mse = (series == Series::kY) ? r.alpha_k * m2 : m2;
    rows.push_back(std::move(r));
  }
  return rows;
}

SpdMatrix target_sigma(const ExperimentConfig& c) {
  if (c.process == Process::kAveraging) {
    if (c.schedule.xi == 1.0) {
      const double a = c.schedule.alpha;
      return SpdMatrix(a / (2.0 * a - 1.0) * c.problem.noise.sigma_b.mat());
    }
    return SpdMatrix(0.5 * c.problem.noise.sigma_b.mat());
  }
  const SpectralConstants sc = spectral_constants(
      c.problem.op.jacobian, c.problem.noise.sigma_b, c.schedule,
      c.problem.certificate.gamma);
  if (c.schedule.xi == 1.0) return *sc.Sigma2;
  return sc.Sigma1;
}

std::vector<W1Row> w1_pipeline(const ExperimentConfig& c,
                               const TrajectoryBatch& b, Series series,
                               const SpdMatrix& sigma) {
  const std::vector<double>* a = &b.y;
  if (series == Series::kZhat) a = &b.zhat;
  if (series == Series::kZ) a = &b.z;
  if (a->empty()) throw ConfigError("w1_pipeline: series not present");

  std::vector<W1Row> rows;
  rows.reserve(b.checkpoints.size());
  for (std::size_t cp = 0; cp < b.checkpoints.size(); ++cp) {
    const SampleSet cloud = batch_slice(b, *a, cp);
    RandomStream tstream(c.seed, kTargetStream + cp);
    const SampleSet target = sample_gaussian(sigma, c.w1.n_target, tstream);
    const W1Estimate est = measure(c, cloud, target, cp);

    RandomStream fa(c.seed, kFloorAStream + cp);
    RandomStream fb(c.seed, kFloorBStream + cp);
    const SampleSet ca = sample_gaussian(sigma, cloud.rows(), fa);
    const SampleSet cb = sample_gaussian(sigma, c.w1.n_target, fb);
    ExperimentConfig floor_cfg = c;
    floor_cfg.w1.bootstrap = 0;
    const W1Estimate floor = measure(floor_cfg, ca, cb, cp);

    W1Row row;
    row.k = b.checkpoints.indices[cp];
    row.alpha_k = b.alpha_at[cp];
    row.w1 = est.value;
    row.stderr_ = est.stderr_;
    row.bias_floor = floor.value;
    row.method = est.method;
    rows.push_back(row);
  }
  return rows;
}

RateFit fit_rate(const std::vector<W1Row>& rows, long long K,
                 std::optional<RateWindow> window) {
  long long k_lo, k_hi;
  if (window) {
    k_lo = window->k_lo;
    k_hi = window->k_hi;
  } else {
    // default: the last half of the checkpoints (transient excluded)
    if (rows.empty()) throw InsufficientData("fit_rate: no checkpoints");
    k_lo = rows[rows.size() / 2].k;
    k_hi = rows.back().k;
  }
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.k < k_lo || r.k > k_hi) continue;
    const double excess = r.w1 - r.bias_floor;
    if (!(excess > 0)) continue;
    xs.push_back(std::log(static_cast<double>(r.k + K)));
    ys.push_back(std::log(excess));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 6)
    throw InsufficientData("fit_rate: only " + std::to_string(n) +
                           " usable checkpoints in window");
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (int i = 0; i < n; ++i) {
    const double e = ys[i] - (f.intercept + f.slope * xs[i]);
    rss += e * e;
  }
  f.r2 = syy > 0 ? 1.0 - rss / syy : 1.0;
  f.slope_stderr = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  f.k_lo = k_lo;
  f.k_hi = k_hi;
  f.n_used = n;
  return f;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, int dim,
                       const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_summary_csv: cannot open " + path);
  std::fprintf(f, "k,alpha_k,mse");
  for (int i = 0; i < dim; ++i) std::fprintf(f, ",mean_%d", i);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) std::fprintf(f, ",cov_%d_%d", i, j);
  std::fprintf(f, "\n");
  for (const auto& r : rows) {
    std::fprintf(f, "%lld,%.17g,%.17g", r.k, r.alpha_k, r.mse);
    for (int i = 0; i < dim; ++i) std::fprintf(f, ",%.17g", r.mean(i));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) std::fprintf(f, ",%.17g", r.cov(i, j));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void write_w1_csv(const std::vector<W1Row>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_w1_csv: cannot open " + path);
  std::fprintf(f, "k,alpha_k,w1,stderr,bias_floor,method\n");
  for (const auto& r : rows)
    std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.17g,%s\n", r.k, r.alpha_k,
                 fmt_guard(r.w1), fmt_guard(r.stderr_), fmt_guard(r.bias_floor),
                 w1_method_str(r.method));
  std::fclose(f);
}

std::string rate_fit_json(const RateFit& f) {
  json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["r2"] = f.r2;
  j["slope_stderr"] = f.slope_stderr;
  json w;
  w["k_lo"] = f.k_lo;
  w["k_hi"] = f.k_hi;
  j["window"] = w;
  j["n_used"] = f.n_used;
  return j.dump(2) + "\n";
}

std::string bound_report_json(const BoundReport& r) {
  return bound_report_to_json(r).dump(2) + "\n";
}

void write_tails_csv(const std::vector<TailRow>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_tails_csv: cannot open " + path);
  std::fprintf(f,
               "a,p_hat,ci_lo,ci_hi,gauss_ccdf,sandwich_lo,sandwich_hi,"
               "bound_sandwich_lo,bound_sandwich_hi,bound_sandwich_valid\n");
  for (const auto& r : rows)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                 r.a, r.p_hat, r.ci_lo, r.ci_hi, r.gauss_ccdf, r.sandwich_lo,
                 r.sandwich_hi, r.bound_sandwich_lo, r.bound_sandwich_hi,
                 r.bound_sandwich_valid ? 1 : 0);
  std::fclose(f);
}

namespace {

void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

Series default_series(const ExperimentConfig& c) {
  return c.process == Process::kDoug ? Series::kZ : Series::kY;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& c, const std::string& out_dir) {
  ensure_dir(out_dir);
  const TrajectoryBatch b = run_batch(c);
  write_batch(b, out_dir + "/batch.bin");
  write_summary_csv(summarize(b, default_series(c)), b.dim,
                    out_dir + "/summary.csv");
  if (c.process == Process::kCoupled) {
    write_summary_csv(summarize(b, Series::kZhat), b.dim,
                      out_dir + "/summary_zhat.csv");
    write_summary_csv(summarize(b, Series::kZ), b.dim, out_dir + "/summary_z.csv");
  }
  if (static_cast<long long>(b.checkpoints.size()) * b.replicas * b.dim <= 2'000'000)
    write_batch_csv(b, out_dir + "/batch.csv");
  return 0;
}

int cmd_doug(const ExperimentConfig& c, const std::string& out_dir) {
  ExperimentConfig cc = c;
  cc.process = Process::kDoug;
  return cmd_simulate(cc, out_dir);
}

int cmd_w1(const ExperimentConfig& c, const std::string& out_dir) {
  ensure_dir(out_dir);
  const TrajectoryBatch b = run_batch(c);
  const SpdMatrix sigma = target_sigma(c);
  const auto rows = w1_pipeline(c, b, default_series(c), sigma);
  write_w1_csv(rows, out_dir + "/w1.csv");
  return 0;
}

int cmd_rates(const ExperimentConfig& c, const std::string& out_dir) {
  ensure_dir(out_dir);
  const TrajectoryBatch b = run_batch(c);
  const SpdMatrix sigma = target_sigma(c);
  const auto rows = w1_pipeline(c, b, default_series(c), sigma);
  write_w1_csv(rows, out_dir + "/w1.csv");
  const RateFit f = fit_rate(rows, c.schedule.K, c.rate_window);
  std::ofstream(out_dir + "/rates.json") << rate_fit_json(f);
  return 0;
}

int cmd_bounds(const ExperimentConfig& c, const std::string& out_dir) {
  ensure_dir(out_dir);
  const ProblemConstants pc = problem_constants(c.problem);
  const SpectralConstants sc = spectral_constants(
      c.problem.op.jacobian, c.problem.noise.sigma_b, c.schedule,
      c.problem.certificate.gamma);
  const SteinConstants st = stein_constants(sc.dim, c.stein_c2);
  const double e0 = (c.x0 - c.problem.op.x_star).squaredNorm();
  const double ev0 = v_norm(c.x0 - c.problem.op.x_star, sc.V);
  const CheckpointPlan plan = c.plan();

  json out = json::array();
  for (long long k : plan.indices) {
    json row;
    row["k"] = k;
    row["alpha_k"] = c.schedule.step(k);
    row["doug_w1"] = bound_report_to_json(doug_w1_bound(k, c.schedule, sc, pc, st));
    row["sa_w1"] =
        bound_report_to_json(sa_w1_bound(k, c.schedule, sc, pc, st, e0, ev0));
    const FlaggedValue mse = mse_bound(k, c.schedule, pc, e0);
    row["mse_bound"] = {{"value", mse.value}, {"hypotheses_ok", mse.hypotheses_ok}};
    const FlaggedValue cpl = coupling_bound(k, c.schedule, sc, pc, e0);
    row["coupling_bound"] = {{"value", cpl.value},
                             {"hypotheses_ok", cpl.hypotheses_ok}};
    out.push_back(row);
  }
  std::ofstream(out_dir + "/bounds.json") << out.dump(2) << "\n";
  return 0;
}

int cmd_tails(const ExperimentConfig& c, const std::string& out_dir) {
  if (!c.tails) throw ConfigError("cmd_tails: config needs a 'tails' section");
  ensure_dir(out_dir);
  const TrajectoryBatch b = run_batch(c);
  const SpdMatrix sigma = target_sigma(c);
  const std::size_t ncp = b.checkpoints.size();
  const std::size_t cp =
      c.tails->checkpoint < 0
          ? ncp - 1
          : static_cast<std::size_t>(c.tails->checkpoint);
  if (cp >= ncp) throw ConfigError("cmd_tails: checkpoint out of range");

  const auto rows_w1 = w1_pipeline(c, b, default_series(c), sigma);
  const double w1_measured = std::max(0.0, rows_w1[cp].w1);

  double w1_theorem = std::numeric_limits<double>::infinity();
  try {
    const ProblemConstants pc = problem_constants(c.problem);
    const SpectralConstants sc = spectral_constants(
        c.problem.op.jacobian, c.problem.noise.sigma_b, c.schedule,
        c.problem.certificate.gamma);
    const SteinConstants st = stein_constants(sc.dim, c.stein_c2);
    const double e0 = (c.x0 - c.problem.op.x_star).squaredNorm();
    const double ev0 = v_norm(c.x0 - c.problem.op.x_star, sc.V);
    w1_theorem =
        sa_w1_bound(b.checkpoints.indices[cp], c.schedule, sc, pc, st, e0, ev0)
            .total;
  } catch (const std::exception&) {
    // the theorem-side sandwich stays trivial when the constants are not
    // computable for this configuration
  }

  const SampleSet cloud = batch_slice(b, default_series(c) == Series::kZ ? b.z : b.y, cp);
  std::vector<TailRow> rows;
  const double dir_var = c.tails->zeta.dot(sigma.mat() * c.tails->zeta);
  for (double a : c.tails->a_grid) {
    TailRow r;
    r.a = a;
    const TailEstimate te = directional_tail(cloud, c.tails->zeta, a);
    r.p_hat = te.p_hat;
    r.ci_lo = te.ci_lo;
    r.ci_hi = te.ci_hi;
    r.gauss_ccdf = normal_ccdf(a / std::sqrt(dir_var));
    const TailSandwich ts = tail_sandwich(a, c.tails->zeta, w1_measured, sigma);
    r.sandwich_lo = ts.lower;
    r.sandwich_hi = ts.upper;
    if (w1_theorem < 1.0) {
      const TailSandwich tb = tail_sandwich(a, c.tails->zeta, w1_theorem, sigma);
      r.bound_sandwich_lo = tb.lower;
      r.bound_sandwich_hi = tb.upper;
      r.bound_sandwich_valid = true;
    } else {
      r.bound_sandwich_lo = 0.0;
      r.bound_sandwich_hi = 1.0;
      r.bound_sandwich_valid = false;
    }
    rows.push_back(r);
  }
  write_tails_csv(rows, out_dir + "/tails.csv");
  return 0;
}

int cmd_clt(const ExperimentConfig& c, const std::string& out_dir) {
  ensure_dir(out_dir);
  ExperimentConfig cc = c;
  cc.process = Process::kAveraging;
  if (cc.problem.noise.multiplicative_kind != MultiplicativeKind::kNone)
    throw ConfigError("cmd_clt: additive-only noise required");
  const TrajectoryBatch b = run_batch(cc);
  const SpdMatrix sigma = target_sigma(cc);
  const auto rows = w1_pipeline(cc, b, Series::kY, sigma);
  write_w1_csv(rows, out_dir + "/clt_w1.csv");
  const RateFit f = fit_rate(rows, cc.schedule.K, cc.rate_window);
  std::ofstream(out_dir + "/clt_rates.json") << rate_fit_json(f);
  return 0;
}

}  // namespace douglab
