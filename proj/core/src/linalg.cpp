#include "sontag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "sontag/errors.hpp"

namespace sontag {
namespace {

constexpr double kPivotTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-12;

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  }
}

}  // namespace

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double inf_norm(const Vector& v) {
  if (v.size() == 0) return 0.0;
  return v.cwiseAbs().maxCoeff();
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

LuFactor::LuFactor(const Matrix& a) : lu_(a), perm_(static_cast<std::size_t>(a.rows())) {
  require_square(a, "LuFactor");
  if (!a.allFinite()) throw NonFiniteValue("LuFactor: non-finite entry");

  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) perm_[static_cast<std::size_t>(i)] = i;

  const double max_entry = a.cwiseAbs().maxCoeff();
  const double threshold = kPivotTolerance * max_entry;
  if (max_entry == 0.0) throw SingularMatrix("LuFactor: zero matrix");

  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot_row = k;
    lu_.col(k).tail(n - k).cwiseAbs().maxCoeff(&pivot_row);
    pivot_row += k;
    if (std::abs(lu_(pivot_row, k)) < threshold) {
      throw SingularMatrix("LuFactor: pivot below tolerance at column " + std::to_string(k));
    }
    if (pivot_row != k) {
      lu_.row(k).swap(lu_.row(pivot_row));
      std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(pivot_row)]);
      sign_ = -sign_;
    }
    const double pivot = lu_(k, k);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double factor = lu_(i, k) / pivot;
      lu_(i, k) = factor;
      if (factor != 0.0) {
        lu_.row(i).tail(n - k - 1).noalias() -= factor * lu_.row(k).tail(n - k - 1);
      }
    }
  }
}

Vector LuFactor::solve(const Vector& b) const {
  const Eigen::Index n = lu_.rows();
  if (b.size() != n) throw std::invalid_argument("LuFactor::solve: dimension mismatch");
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = b(perm_[static_cast<std::size_t>(i)]);
  // Forward substitution with unit lower factor, then back substitution.
  for (Eigen::Index i = 1; i < n; ++i) x(i) -= lu_.row(i).head(i).dot(x.head(i));
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    x(i) = (x(i) - lu_.row(i).tail(n - i - 1).dot(x.tail(n - i - 1))) / lu_(i, i);
  }
  return x;
}

Matrix LuFactor::solve(const Matrix& b) const {
  if (b.rows() != lu_.rows()) throw std::invalid_argument("LuFactor::solve: dimension mismatch");
  Matrix x(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) x.col(j) = solve(Vector(b.col(j)));
  return x;
}

double LuFactor::determinant() const { return sign_ * lu_.diagonal().prod(); }

Vector solve_linear(const Matrix& a, const Vector& b) { return LuFactor(a).solve(b); }

Matrix solve_linear(const Matrix& a, const Matrix& b) { return LuFactor(a).solve(b); }

Matrix inverse(const Matrix& a) {
  return LuFactor(a).solve(Matrix(Matrix::Identity(a.rows(), a.cols())));
}

Matrix cholesky_pd(const Matrix& m) {
  require_square(m, "cholesky_pd");
  if (!m.allFinite()) throw NonFiniteValue("cholesky_pd: non-finite entry");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > kSymmetryTolerance * scale) {
    throw NotSymmetric("cholesky_pd: matrix is not symmetric");
  }

  const Matrix s = symmetrize(m);
  const Eigen::Index n = s.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = s(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) {
      throw NotPositiveDefinite("cholesky_pd: nonpositive pivot at index " + std::to_string(j));
    }
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (s(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return l;
}

bool is_positive_definite(const Matrix& m) {
  try {
    cholesky_pd(m);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& w) {
  require_square(a, "solve_lyapunov");
  require_square(w, "solve_lyapunov");
  if (a.rows() != w.rows()) throw std::invalid_argument("solve_lyapunov: size mismatch");

  const Eigen::Index n = a.rows();
  const Eigen::Index nn = n * n;
  // Column-major vec: vec(A^T X) = (I kron A^T) vec X, vec(X A) = (A^T kron I) vec X.
  Matrix kron = Matrix::Zero(nn, nn);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = i + j * n;
      for (Eigen::Index k = 0; k < n; ++k) kron(row, k + j * n) += a(k, i);
      for (Eigen::Index l = 0; l < n; ++l) kron(row, i + l * n) += a(l, j);
    }
  }
  const Matrix ws = symmetrize(w);
  Vector rhs(nn);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) rhs(i + j * n) = -ws(i, j);
  }

  const Vector vec_x = LuFactor(kron).solve(rhs);
  Matrix x(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = vec_x(i + j * n);
  }
  return symmetrize(x);
}

bool is_hurwitz(const Matrix& a) {
  require_square(a, "is_hurwitz");
  try {
    const Matrix x = solve_lyapunov(a, Matrix::Identity(a.rows(), a.cols()));
    return is_positive_definite(x);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace sontag
