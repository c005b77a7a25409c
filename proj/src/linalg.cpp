#include "douglab/linalg.hpp"

#include <cmath>
#include <string>

namespace douglab {
namespace {

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionMismatch(std::string(who) + ": matrix must be square");
}

void require_symmetric(const Matrix& m, const char* who) {
  require_square(m, who);
  const double scale = m.norm();
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-12 * (scale > 0 ? scale : 1.0))
    throw NotSymmetric(std::string(who) + ": relative asymmetry " +
                       std::to_string(asym / (scale > 0 ? scale : 1.0)));
}

}  // namespace

Matrix cholesky(const Matrix& s) {
  require_symmetric(s, "cholesky");
  const Eigen::Index n = s.rows();
  const double tol = pd_tolerance(s);
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tol)) throw NotPd("cholesky: pivot " + std::to_string(d) +
                                " at column " + std::to_string(j));
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

SpdMatrix::SpdMatrix(const Matrix& m) {
  require_symmetric(m, "SpdMatrix");
  mat_ = 0.5 * (m + m.transpose());
  chol_ = cholesky(mat_);
}

EigenDecomposition symmetric_eigen(const Matrix& s_in) {
  require_symmetric(s_in, "symmetric_eigen");
  const Eigen::Index n = s_in.rows();
  Matrix a = 0.5 * (s_in + s_in.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double total = a.norm();
  const double stop = 1e-12 * (total > 0 ? total : 1.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= stop) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  EigenDecomposition out;
  out.values = a.diagonal();
  out.vectors = v;
  // sort ascending, carrying the eigenvectors along
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index m = i;
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (out.values(j) < out.values(m)) m = j;
    if (m != i) {
      std::swap(out.values(i), out.values(m));
      out.vectors.col(i).swap(out.vectors.col(m));
    }
  }
  return out;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  require_square(a, "solve_lyapunov");
  if (q.rows() != a.rows() || q.cols() != a.cols())
    throw DimensionMismatch("solve_lyapunov: A and Q dims differ");
  require_symmetric(q, "solve_lyapunov(Q)");
  const Eigen::Index n = a.rows();
  // vec is column-major: vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X)
  Matrix big = Matrix::Zero(n * n, n * n);
  const Matrix at = a.transpose();
  for (Eigen::Index j = 0; j < n; ++j)
    big.block(j * n, j * n, n, n) += at;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k)
        big(j * n + i, k * n + i) += at(j, k);
  Vector rhs(n * n);
  for (Eigen::Index j = 0; j < n; ++j) rhs.segment(j * n, n) = -q.col(j);

  Eigen::PartialPivLU<Matrix> lu(big);
  Vector xv = lu.solve(rhs);
  Matrix x(n, n);
  for (Eigen::Index j = 0; j < n; ++j) x.col(j) = xv.segment(j * n, n);
  x = 0.5 * (x + x.transpose()).eval();

  const double resid = (a.transpose() * x + x * a + q).norm();
  if (!(resid <= 1e-10 * (1.0 + q.norm())) || !xv.allFinite())
    throw SingularSystem("solve_lyapunov: residual " + std::to_string(resid) +
                         " (A and -A^T likely share an eigenvalue)");
  return x;
}

bool is_hurwitz(const Matrix& a) {
  Matrix x;
  try {
    x = solve_lyapunov(a, Matrix::Identity(a.rows(), a.cols()));
    cholesky(x);
  } catch (const SingularSystem&) {
    return false;
  } catch (const NotPd&) {
    return false;
  }
  return true;
}

Matrix spd_sqrt(const SpdMatrix& s) {
  const EigenDecomposition ed = symmetric_eigen(s.mat());
  const double tol = pd_tolerance(s.mat());
  if (!(ed.values.minCoeff() > tol))
    throw NotPd("spd_sqrt: eigenvalue " + std::to_string(ed.values.minCoeff()));
  Matrix root = ed.vectors *
                ed.values.array().sqrt().matrix().asDiagonal() *
                ed.vectors.transpose();
  return 0.5 * (root + root.transpose());
}

double v_norm(const Vector& x, const SpdMatrix& v) {
  if (x.size() != v.dim())
    throw DimensionMismatch("v_norm: vector dim " + std::to_string(x.size()) +
                            " vs matrix dim " + std::to_string(v.dim()));
  const double q = x.dot(v.mat() * x);
  return std::sqrt(q > 0 ? q : 0.0);
}

double v_operator_norm(const Matrix& u, const SpdMatrix& v) {
  if (u.rows() != v.dim() || u.cols() != v.dim())
    throw DimensionMismatch("v_operator_norm: dims differ");
  const Matrix root = spd_sqrt(v);
  // small dims: explicit inverse of the root is fine
  const Matrix m = root * u * root.inverse();
  return spectral_norm(m);
}

double spectral_norm(const Matrix& u) {
  require_square(u, "spectral_norm");
  const Matrix g = u.transpose() * u;
  const EigenDecomposition ed = symmetric_eigen(g);
  const double top = ed.values(ed.values.size() - 1);
  return std::sqrt(top > 0 ? top : 0.0);
}

}  // namespace douglab
