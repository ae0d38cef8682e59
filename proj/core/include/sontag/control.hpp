#pragma once

#include <optional>
#include <variant>

#include "sontag/clf.hpp"
#include "sontag/linalg.hpp"
#include "sontag/model.hpp"
#include "sontag/riccati.hpp"

namespace sontag {

/// Scalar factor of the Sontag-type law,
///
///   lambda = (a + sqrt(a^2 + q beta)) / beta,  q = x^T Q x,  beta = b R^-1 b^T.
///
/// For a < 0 the rationalized form q / (sqrt(a^2 + q beta) - a) is used,
/// which avoids cancellation when q beta << a^2. Requires beta > 0, q >= 0.
/// Throws NonFiniteValue on overflow.
double lambda_factor(double a, double q, double beta);

enum class Branch { kBNonzero, kBZero };

struct ControlEval {
  Vector u;
  std::optional<double> lambda;  // empty on the b = 0 branch
  Branch branch = Branch::kBNonzero;
  bool clf_violation = false;  // b = 0 and the drift does not decrease V at x != 0
};

/// u_S(x) = -R^-1 b(x)^T lambda(x) for b(x) != 0, zero otherwise.
class SontagController {
 public:
  /// Throws BadWeights when Q or R is not SPD.
  SontagController(Clf clf, SystemModel sys, Matrix q, Matrix r);

  const Clf& clf() const { return clf_; }
  const SystemModel& system() const { return sys_; }
  const Matrix& q() const { return q_; }
  const Matrix& r() const { return r_; }
  const Matrix& r_inv() const { return r_inv_; }

 private:
  Clf clf_;
  SystemModel sys_;
  Matrix q_;
  Matrix r_;
  Matrix r_inv_;
};

ControlEval sontag_control(const SontagController& ctrl, const Vector& x);

struct LqrController {
  Matrix k;
};

/// u = -K x.
Vector lqr_control(const Matrix& k, const Vector& x);

/// u = gamma(z)^-1 (-psi(z) - K_fbl z), z = T(x).
struct FblController {
  FeedbackLinearization fbl;
  Matrix k_fbl;
};

/// Gain on z making du/dx(0) = -R^-1 B^T P:
/// K_fbl = gamma(0) K_lqr J_T0^-1 - dpsi/dz(0).
Matrix fbl_gain_design(const FeedbackLinearization& fbl, const LqrDesign& design);

/// Throws DomainViolation when gamma(T(x)) is numerically singular.
Vector fbl_control(const FblController& ctrl, const Vector& x);

struct ZeroController {
  int input_dim = 1;
};

using Controller = std::variant<SontagController, LqrController, FblController, ZeroController>;

/// Uniform evaluation used by the simulator; lambda is only reported by the
/// Sontag-type controller.
struct ControlSample {
  Vector u;
  std::optional<double> lambda;
  bool clf_violation = false;
};

ControlSample evaluate(const Controller& controller, const Vector& x);
Vector control_input(const Controller& controller, const Vector& x);

/// 1/2 x^T Q x + a(x) - 1/2 b(x) R^-1 b(x)^T; zero wherever V solves the
/// HJB equation of the standard quadratic cost.
double hjb_residual(const Clf& clf, const SystemModel& sys, const Matrix& q, const Matrix& r,
                    const Vector& x);

}  // namespace sontag
