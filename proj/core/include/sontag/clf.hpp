#pragma once

#include <variant>

#include "sontag/linalg.hpp"
#include "sontag/model.hpp"
#include "sontag/riccati.hpp"

namespace sontag {

/// V(x) = 1/2 x^T P x.
class QuadraticClf {
 public:
  /// Throws NotPositiveDefinite / NotSymmetric when P is not SPD.
  explicit QuadraticClf(Matrix p);

  const Matrix& p() const { return p_; }

 private:
  Matrix p_;
};

/// V(x) = 1/2 T(x)^T P~ T(x), a quadratic form in feedback-linearizing
/// coordinates. Only defined on the structure's domain.
class TransformedClf {
 public:
  TransformedClf(Matrix p_tilde, FeedbackLinearization fbl);

  const Matrix& p_tilde() const { return p_tilde_; }
  const FeedbackLinearization& fbl() const { return fbl_; }

 private:
  Matrix p_tilde_;
  FeedbackLinearization fbl_;
};

using Clf = std::variant<QuadraticClf, TransformedClf>;

struct ValueGradient {
  double value = 0.0;
  Vector gradient;
};

/// Throws DomainViolation for a TransformedClf outside its domain.
ValueGradient clf_value_grad(const Clf& clf, const Vector& x);
double clf_value(const Clf& clf, const Vector& x);

/// The matrix of the quadratic form (P or P~).
const Matrix& clf_matrix(const Clf& clf);

struct LieDerivatives {
  double a = 0.0;  // L_f V
  Vector b;        // L_G V, one entry per input
};

LieDerivatives lie_derivatives(const Clf& clf, const SystemModel& sys, const Vector& x);

/// Threshold below which b(x) is treated as zero: 1e-9 of the bound
/// |grad V|_inf * |G(x)|_1 on |b|_inf.
double b_zero_tolerance(const Vector& gradient, const Matrix& input_matrix);

inline constexpr double kClfDecayTolerance = 1e-9;

/// inf_u [a + b u] < 0 at x != 0: either b is nonzero or a is strictly
/// negative (a < -tol_a |x|^2).
bool clf_condition_at(const LieDerivatives& lie, const Vector& x, double tol_b, double tol_a);
bool clf_condition_at(const Clf& clf, const SystemModel& sys, const Vector& x);

/// P~ = J_T0^-T P J_T0^-1. Throws SingularMatrix for singular J_T0.
Matrix transform_P(const Matrix& p, const Matrix& jt0);

QuadraticClf build_lqr_clf(const LqrDesign& design);
TransformedClf build_global_clf(const LqrDesign& design, const FeedbackLinearization& fbl);

}  // namespace sontag
