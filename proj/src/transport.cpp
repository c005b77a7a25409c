#include "douglab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace douglab {
namespace {

// Integral of |F - G| for two weighted sorted samples (weights sum to 1 on
// each side). Plain empirical measures use unit counts.
double w1_sorted_weighted(const std::vector<double>& xv,
                          const std::vector<double>& xw,
                          const std::vector<double>& yv,
                          const std::vector<double>& yw) {
  double total = 0.0;
  double fx = 0.0, fy = 0.0;
  std::size_t i = 0, j = 0;
  double prev = 0.0;
  bool have_prev = false;
  while (i < xv.size() || j < yv.size()) {
    double t;
    if (j >= yv.size() || (i < xv.size() && xv[i] <= yv[j]))
      t = xv[i];
    else
      t = yv[j];
    if (have_prev && t > prev) total += std::abs(fx - fy) * (t - prev);
    while (i < xv.size() && xv[i] == t) fx += xw[i++];
    while (j < yv.size() && yv[j] == t) fy += yw[j++];
    prev = t;
    have_prev = true;
  }
  return total;
}

std::vector<double> sorted_column(const SampleSet& s) {
  std::vector<double> v(s.data(), s.data() + s.rows());
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> bootstrap_weights(std::size_t n, RandomStream& rng) {
  std::vector<double> w(n, 0.0);
  const double inc = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx =
        static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    w[idx < n ? idx : n - 1] += inc;
  }
  return w;
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

void require_same_dim(const SampleSet& xs, const SampleSet& ys, const char* who) {
  if (xs.cols() != ys.cols())
    throw DimensionMismatch(std::string(who) + ": dims differ");
  if (xs.rows() < 1 || ys.rows() < 1)
    throw EmptySample(std::string(who) + ": empty sample set");
}

// Hungarian algorithm with potentials; returns the minimum total cost of a
// perfect matching for the n x n cost matrix.
double hungarian(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

double matching_value(const SampleSet& xs, const SampleSet& ys) {
  const int n = static_cast<int>(xs.rows());
  Matrix cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost(i, j) = (xs.row(i) - ys.row(j)).norm();
  return hungarian(cost) / n;
}

}  // namespace

W1Estimate w1_1d(const SampleSet& xs, const SampleSet& ys, int bootstrap,
                 std::uint64_t boot_seed) {
  require_same_dim(xs, ys, "w1_1d");
  if (xs.cols() != 1) throw DimensionMismatch("w1_1d: dim must be 1");
  const std::vector<double> xv = sorted_column(xs);
  const std::vector<double> yv = sorted_column(ys);
  const std::vector<double> xw(xv.size(), 1.0 / xv.size());
  const std::vector<double> yw(yv.size(), 1.0 / yv.size());

  W1Estimate e;
  e.method = W1Method::kExact1d;
  e.n = static_cast<long long>(std::min(xv.size(), yv.size()));
  e.value = w1_sorted_weighted(xv, xw, yv, yw);
  if (bootstrap > 1) {
    std::vector<double> vals(bootstrap);
    RandomStream rng(boot_seed, 0x1DULL);
    for (int b = 0; b < bootstrap; ++b) {
      const auto bw = bootstrap_weights(xv.size(), rng);
      const auto bw2 = bootstrap_weights(yv.size(), rng);
      vals[b] = w1_sorted_weighted(xv, bw, yv, bw2);
    }
    e.stderr_ = stddev(vals);
  }
  return e;
}

W1Estimate w1_exact_matching(const SampleSet& xs, const SampleSet& ys,
                             int bootstrap, std::uint64_t boot_seed) {
  require_same_dim(xs, ys, "w1_exact_matching");
  if (xs.rows() != ys.rows())
    throw DimensionMismatch("w1_exact_matching: sizes must match");
  if (xs.rows() > 512)
    throw TooLarge("w1_exact_matching: n = " + std::to_string(xs.rows()) +
                   " exceeds 512");
  W1Estimate e;
  e.method = W1Method::kExactMatching;
  e.n = xs.rows();
  e.value = matching_value(xs, ys);
  if (bootstrap > 1) {
    const long long n = xs.rows();
    std::vector<double> vals(bootstrap);
    RandomStream rng(boot_seed, 0x2DULL);
    SampleSet bx(n, xs.cols()), by(n, ys.cols());
    for (int b = 0; b < bootstrap; ++b) {
      for (long long i = 0; i < n; ++i) {
        bx.row(i) = xs.row(static_cast<long long>(rng.uniform() * n) % n);
        by.row(i) = ys.row(static_cast<long long>(rng.uniform() * n) % n);
      }
      vals[b] = matching_value(bx, by);
    }
    e.stderr_ = stddev(vals);
  }
  return e;
}

W1Estimate w1_sliced(const SampleSet& xs, const SampleSet& ys,
                     int n_projections, RandomStream& rng, int bootstrap) {
  require_same_dim(xs, ys, "w1_sliced");
  if (n_projections < 1) throw ConfigError("w1_sliced: n_projections >= 1");
  const Eigen::Index d = xs.cols();

  const std::size_t nx = static_cast<std::size_t>(xs.rows());
  const std::size_t ny = static_cast<std::size_t>(ys.rows());
  std::vector<std::vector<double>> px(n_projections), py(n_projections);
  std::vector<std::vector<int>> ox(n_projections), oy(n_projections);
  for (int p = 0; p < n_projections; ++p) {
    Vector dir(d);
    do {
      for (Eigen::Index i = 0; i < d; ++i) dir(i) = rng.normal();
    } while (dir.norm() == 0.0);
    dir /= dir.norm();
    const Vector vx = xs * dir;
    const Vector vy = ys * dir;
    ox[p].resize(nx);
    oy[p].resize(ny);
    std::iota(ox[p].begin(), ox[p].end(), 0);
    std::iota(oy[p].begin(), oy[p].end(), 0);
    std::sort(ox[p].begin(), ox[p].end(),
              [&](int i, int j) { return vx(i) < vx(j); });
    std::sort(oy[p].begin(), oy[p].end(),
              [&](int i, int j) { return vy(i) < vy(j); });
    px[p].resize(nx);
    py[p].resize(ny);
    for (std::size_t i = 0; i < nx; ++i) px[p][i] = vx(ox[p][i]);
    for (std::size_t i = 0; i < ny; ++i) py[p][i] = vy(oy[p][i]);
  }
  const std::vector<double> xw(nx, 1.0 / nx);
  const std::vector<double> yw(ny, 1.0 / ny);

  W1Estimate e;
  e.method = W1Method::kSliced;
  e.n = std::min(xs.rows(), ys.rows());
  e.n_projections = n_projections;
  double sum = 0.0;
  for (int p = 0; p < n_projections; ++p)
    sum += w1_sorted_weighted(px[p], xw, py[p], yw);
  e.value = sum / n_projections;

  if (bootstrap > 1) {
    // bootstrap the points (multiplicity weights per original index), shared
    // across all projection directions
    RandomStream brng(rng.master_seed() ^ 0xB00Dull, rng.stream_id());
    std::vector<double> vals(bootstrap);
    std::vector<double> wxp(nx), wyp(ny);
    for (int b = 0; b < bootstrap; ++b) {
      const auto bwx = bootstrap_weights(nx, brng);
      const auto bwy = bootstrap_weights(ny, brng);
      double s = 0.0;
      for (int p = 0; p < n_projections; ++p) {
        for (std::size_t i = 0; i < nx; ++i) wxp[i] = bwx[ox[p][i]];
        for (std::size_t i = 0; i < ny; ++i) wyp[i] = bwy[oy[p][i]];
        s += w1_sorted_weighted(px[p], wxp, py[p], wyp);
      }
      vals[b] = s / n_projections;
    }
    e.stderr_ = stddev(vals);
  }
  return e;
}

SampleSet sample_gaussian(const SpdMatrix& sigma, long long n, RandomStream& rng) {
  if (n < 1) throw EmptySample("sample_gaussian: n must be >= 1");
  const Eigen::Index d = sigma.dim();
  SampleSet out(n, d);
  Vector g(d);
  for (long long i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(j) = rng.normal();
    out.row(i) = (sigma.chol() * g).transpose();
  }
  return out;
}

double w1_gaussian_1d(double sigma1, double sigma2) {
  return std::abs(sigma1 - sigma2) * std::sqrt(2.0 / M_PI);
}

TailEstimate directional_tail(const SampleSet& xs, const Vector& zeta, double a) {
  if (zeta.size() != xs.cols())
    throw DimensionMismatch("directional_tail: zeta dim");
  if (std::abs(zeta.norm() - 1.0) > 1e-9)
    throw ConfigError("directional_tail: zeta must be a unit vector");
  const long long n = xs.rows();
  if (n < 1) throw EmptySample("directional_tail: empty");
  long long hits = 0;
  const Vector proj = xs * zeta;
  for (long long i = 0; i < n; ++i)
    if (proj(i) > a) ++hits;
  TailEstimate t;
  t.n = n;
  t.p_hat = static_cast<double>(hits) / n;
  const double z = 1.959963984540054;  // 97.5% quantile
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (t.p_hat + z2 / (2 * n)) / denom;
  const double half =
      z * std::sqrt(t.p_hat * (1 - t.p_hat) / n + z2 / (4.0 * n * n)) / denom;
  t.ci_lo = std::max(0.0, center - half);
  t.ci_hi = std::min(1.0, center + half);
  return t;
}

double normal_ccdf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace douglab
