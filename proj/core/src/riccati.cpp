#include "sontag/riccati.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sontag/errors.hpp"

namespace sontag {
namespace {

constexpr int kMaxSignIterations = 100;
constexpr double kSignTolerance = 1e-10;
constexpr int kMaxNewtonIterations = 200;
constexpr double kNewtonTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-8;
constexpr double kStagnationFloor = 1e-9;

double one_norm(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

// Stabilizing Riccati solution from the matrix sign function of the
// Hamiltonian [[A, -S], [-Q, -A^T]], S = B R^-1 B^T. The stable invariant
// subspace span [I; P] is the kernel of sign(H) + I.
Matrix sign_function_seed(const Matrix& a, const Matrix& s, const Matrix& q) {
  const Eigen::Index n = a.rows();
  Matrix z(2 * n, 2 * n);
  z << a, -s, -q, -a.transpose();

  bool converged = false;
  for (int it = 0; it < kMaxSignIterations; ++it) {
    const LuFactor lu(z);
    const Matrix z_inv = lu.solve(Matrix(Matrix::Identity(2 * n, 2 * n)));
    // Determinant scaling keeps the early iterations from stalling.
    const double c = std::pow(std::abs(lu.determinant()), 1.0 / static_cast<double>(2 * n));
    const double scale = (std::isfinite(c) && c > 0.0) ? c : 1.0;
    const Matrix next = 0.5 * (z / scale + scale * z_inv);
    const double change = one_norm(next - z);
    z = next;
    if (change <= kSignTolerance * one_norm(z)) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NotStabilizable("sign iteration did not converge");

  const Matrix eye = Matrix::Identity(n, n);
  Matrix lhs(2 * n, n);
  lhs << z.topRightCorner(n, n), z.bottomRightCorner(n, n) + eye;
  Matrix rhs(2 * n, n);
  rhs << z.topLeftCorner(n, n) + eye, z.bottomLeftCorner(n, n);
  // Overdetermined but consistent; normal equations are adequate at n <= 10.
  const Matrix p = solve_linear(Matrix(lhs.transpose() * lhs), Matrix(-(lhs.transpose() * rhs)));
  return symmetrize(p);
}

void check_weights(const Matrix& q, const Matrix& r) {
  if (!is_positive_definite(q)) throw BadWeights("Q is not symmetric positive definite");
  if (!is_positive_definite(r)) throw BadWeights("R is not symmetric positive definite");
}

}  // namespace

Matrix care_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                     const Matrix& p) {
  const Matrix pb = p * b;
  return a.transpose() * p + p * a - pb * solve_linear(r, Matrix(pb.transpose())) + q;
}

LqrDesign solve_care(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != b.cols() ||
      r.cols() != b.cols() || n == 0 || b.cols() == 0) {
    throw std::invalid_argument("solve_care: non-conformable dimensions");
  }
  if (!a.allFinite() || !b.allFinite()) throw NonFiniteValue("solve_care: non-finite A or B");
  check_weights(q, r);

  const Matrix qs = symmetrize(q);
  const Matrix rs = symmetrize(r);
  const LuFactor r_lu(rs);
  const Matrix r_inv_bt = r_lu.solve(Matrix(b.transpose()));
  const Matrix s = symmetrize(b * r_inv_bt);

  Matrix p;
  try {
    p = sign_function_seed(a, s, qs);

    // Kleinman-Newton refinement from the seed.
    bool converged = false;
    double previous_change = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
      // Newton step in correction form: closed^T D + D closed = -residual(P).
      const Matrix k = r_inv_bt * p;
      const Matrix closed = a - b * k;
      const Matrix residual = symmetrize(care_residual(a, b, qs, rs, p));
      const Matrix delta = solve_lyapunov(closed, residual);
      const double change = inf_norm(delta);
      p = symmetrize(Matrix(p + delta));
      const double scale = inf_norm(p);
      if (change <= kNewtonTolerance * scale) {
        converged = true;
        break;
      }
      // Ill-conditioned P: updates settle at rounding level above the tolerance.
      if (change <= kStagnationFloor * scale && change > 0.5 * previous_change) {
        converged = true;
        break;
      }
      previous_change = change;
    }
    if (!converged) throw NotStabilizable("Kleinman-Newton iteration did not converge");
  } catch (const NotStabilizable&) {
    throw;
  } catch (const Error& e) {
    throw NotStabilizable(std::string("Riccati solve failed: ") + e.what());
  }

  LqrDesign design{a, b, qs, rs, p, r_inv_bt * p};
  if (!design.p.allFinite() || !is_positive_definite(design.p)) {
    throw NotStabilizable("Riccati solution is not positive definite");
  }
  const double residual = inf_norm(care_residual(a, b, qs, rs, design.p));
  if (!(residual <= kResidualTolerance * inf_norm(qs))) {
    throw NotStabilizable("Riccati residual above tolerance");
  }
  if (!is_hurwitz(a - b * design.k)) throw NotStabilizable("closed loop A - BK is not Hurwitz");
  return design;
}

bool stabilizability_check(const Matrix& a, const Matrix& b) {
  try {
    solve_care(a, b, Matrix::Identity(a.rows(), a.rows()), Matrix::Identity(b.cols(), b.cols()));
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace sontag
