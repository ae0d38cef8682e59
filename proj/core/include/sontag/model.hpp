#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sontag/linalg.hpp"

namespace sontag {

using VectorField = std::function<Vector(const Vector&)>;
using MatrixField = std::function<Matrix(const Vector&)>;
using StatePredicate = std::function<bool(const Vector&)>;

/// Input-affine dynamics x' = f(x) + G(x) u with an equilibrium at the origin.
///
/// Immutable after construction. The maps must be pure; models are shared
/// read-only across simulation workers.
class SystemModel {
 public:
  /// Throws std::invalid_argument when dimensions disagree or |f(0)| > 1e-12.
  /// An empty `domain` admits every state.
  SystemModel(int state_dim, int input_dim, VectorField drift, MatrixField input_matrix,
              MatrixField drift_jacobian = {}, StatePredicate domain = {});

  int state_dim() const { return n_; }
  int input_dim() const { return m_; }

  Vector drift(const Vector& x) const { return f_(x); }
  Matrix input_matrix(const Vector& x) const { return g_(x); }

  bool has_drift_jacobian() const { return static_cast<bool>(df_); }
  Matrix drift_jacobian(const Vector& x) const { return df_(x); }

  bool in_domain(const Vector& x) const { return !domain_ || domain_(x); }

 private:
  int n_;
  int m_;
  VectorField f_;
  MatrixField g_;
  MatrixField df_;
  StatePredicate domain_;
};

/// Coordinates z = T(x) in which z' = A~ z + B~ (psi(z) + gamma(z) u).
struct FeedbackLinearization {
  VectorField transform;
  MatrixField transform_jacobian;  // optional, central differences otherwise
  Matrix transform_jacobian_origin;
  VectorField psi;
  MatrixField psi_jacobian;  // optional, central differences otherwise
  MatrixField gamma;
  Matrix a_tilde;
  Matrix b_tilde;
  StatePredicate domain;  // states x where gamma(T(x)) is nonsingular; empty = everywhere
  std::string domain_description;

  bool in_domain(const Vector& x) const { return !domain || domain(x); }
};

/// Checks T(0) = 0, psi(0) = 0, invertible J_T(0), nonsingular gamma at the
/// origin and at every sample inside the domain (a sample also fails when
/// max abs gamma < 1e-12 max abs gamma(0)). Throws std::invalid_argument.
void validate(const FeedbackLinearization& fbl, const std::vector<Vector>& samples = {});

/// J_T(x), analytic when available.
Matrix transform_jacobian(const FeedbackLinearization& fbl, const Vector& x);
/// d psi / dz at z = 0, analytic when available.
Matrix psi_jacobian_origin(const FeedbackLinearization& fbl);

struct PendulumParams {
  double mass = 1.0;      // kg
  double gravity = 9.81;  // m/s^2
  double length = 1.0;    // m
  double inertia = 0.0;   // kg m^2
};

void validate(const PendulumParams& p);

/// A system together with its feedback-linearizing structure.
struct Plant {
  std::string name;
  SystemModel system;
  FeedbackLinearization fbl;
};

/// Inverted pendulum driven by cart acceleration; state (theta, theta_dot) in
/// radians. Already in Brunovsky form, so T is the identity and the
/// linearizing structure is valid for |theta| < pi/2.
Plant pendulum_system(const PendulumParams& p);

/// f(x) = A x, G(x) = B, with the trivial structure T = I, psi = 0, gamma = I.
Plant lti_system(const Matrix& a, const Matrix& b);

/// f(x) + G(x) u. Throws DomainViolation outside the model's domain and
/// NonFiniteValue on non-finite output.
Vector eval_dynamics(const SystemModel& sys, const Vector& x, const Vector& u);

/// Central-difference Jacobian with per-coordinate step rel_step * (1 + |x_i|).
Matrix central_difference_jacobian(const VectorField& fn, const Vector& x,
                                   double rel_step = 1e-6);

struct Linearization {
  Matrix a;
  Matrix b;
};

/// A = df/dx(0) (analytic if provided), B = G(0). Throws NonFiniteJacobian.
Linearization linearize(const SystemModel& sys);

}  // namespace sontag
