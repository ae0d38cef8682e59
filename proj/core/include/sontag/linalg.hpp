#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sontag {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Max absolute row sum.
double inf_norm(const Matrix& m);
double inf_norm(const Vector& v);

/// (M + M^T) / 2.
Matrix symmetrize(const Matrix& m);

bool all_finite(const Matrix& m);

/// Partial-pivot LU factorization of a square matrix.
///
/// Rank deficiency is declared when a pivot falls below 1e-12 times the
/// largest absolute entry of the input, in which case the constructor throws
/// SingularMatrix.
class LuFactor {
 public:
  explicit LuFactor(const Matrix& a);

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

  double determinant() const;
  Eigen::Index size() const { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<Eigen::Index> perm_;
  int sign_ = 1;
};

Vector solve_linear(const Matrix& a, const Vector& b);
Matrix solve_linear(const Matrix& a, const Matrix& b);
Matrix inverse(const Matrix& a);

/// Lower-triangular Cholesky factor L with L L^T = M.
///
/// Throws NotSymmetric when |M - M^T| exceeds 1e-12 |M| (max-entry norms) and
/// NotPositiveDefinite on a nonpositive pivot. The input is symmetrized
/// before factoring.
Matrix cholesky_pd(const Matrix& m);

/// cholesky_pd without the exceptions. Asymmetric input counts as not PD.
bool is_positive_definite(const Matrix& m);

/// Solves A^T X + X A = -W through the vectorized n^2 x n^2 system.
///
/// Throws SingularMatrix when A has eigenvalue pairs summing to zero. The
/// result is symmetrized.
Matrix solve_lyapunov(const Matrix& a, const Matrix& w);

/// True iff the Lyapunov solution for W = I exists and is positive definite.
bool is_hurwitz(const Matrix& a);

}  // namespace sontag
