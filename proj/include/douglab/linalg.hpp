#pragma once

#include <Eigen/Dense>

#include "douglab/common.hpp"

namespace douglab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Scale-relative degeneracy threshold for Cholesky pivots.
inline double pd_tolerance(const Matrix& s) {
  return 1e-12 * s.trace() / static_cast<double>(s.rows());
}

// Lower-triangular Cholesky factor with pivot check; throws NotPd when a
// pivot falls at or below pd_tolerance(s).
Matrix cholesky(const Matrix& s);

// Symmetric positive definite matrix with its Cholesky factor. Construction
// enforces symmetry to within 1e-12 relative and positive definiteness.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& m);

  const Matrix& mat() const { return mat_; }
  const Matrix& chol() const { return chol_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
  Matrix chol_;
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns, S * v_i = values[i] * v_i
};

// Cyclic Jacobi rotations, iterated until the off-diagonal Frobenius mass is
// below 1e-12 relative to ||S||_F. Throws NotSymmetric for asymmetric input.
EigenDecomposition symmetric_eigen(const Matrix& s);

// Solves A^T X + X A + Q = 0 through the Kronecker identity
// (I (x) A^T + A^T (x) I) vec(X) = -vec(Q) with partial-pivot LU, then
// symmetrizes. Throws SingularSystem when A and -A^T share an eigenvalue.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

// Lyapunov positive-definite certificate: true iff A^T X + X A + I = 0 has an
// SPD solution. A singular system or an indefinite solution maps to false.
bool is_hurwitz(const Matrix& a);

// Symmetric PD square root via eigendecomposition.
Matrix spd_sqrt(const SpdMatrix& s);

// sqrt(x^T V x)
double v_norm(const Vector& x, const SpdMatrix& v);

// ||U||_V = sup_{||x||_V = 1} ||Ux||_V, the largest singular value of
// V^{1/2} U V^{-1/2}.
double v_operator_norm(const Matrix& u, const SpdMatrix& v);

// Spectral (2-)norm of a general square matrix.
double spectral_norm(const Matrix& u);

}  // namespace douglab
