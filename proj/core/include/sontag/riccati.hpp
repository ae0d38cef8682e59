#pragma once

#include "sontag/linalg.hpp"

namespace sontag {

/// LQR design for the pair (A, B) under weights (Q, R).
///
/// P is the stabilizing solution of A^T P + P A - P B R^-1 B^T P + Q = 0 and
/// K = R^-1 B^T P. Instances returned by solve_care satisfy: Q, R, P
/// symmetric positive definite, relative residual <= 1e-8, A - B K Hurwitz.
struct LqrDesign {
  Matrix a;
  Matrix b;
  Matrix q;
  Matrix r;
  Matrix p;
  Matrix k;
};

/// Residual A^T P + P A - P B R^-1 B^T P + Q.
Matrix care_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                     const Matrix& p);

/// Continuous algebraic Riccati solve.
///
/// Throws BadWeights when Q or R is not symmetric positive definite and
/// NotStabilizable when no certified stabilizing solution is found.
LqrDesign solve_care(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r);

/// solve_care(A, B, I, I) succeeded with all invariants.
bool stabilizability_check(const Matrix& a, const Matrix& b);

}  // namespace sontag
