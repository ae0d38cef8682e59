#include "sontag/control.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "overloaded.hpp"
#include "sontag/errors.hpp"

namespace sontag {

using detail::Overloaded;

namespace {

constexpr double kGammaFloor = 1e-12;

}  // namespace

double lambda_factor(double a, double q, double beta) {
  if (!(beta > 0.0) || !(q >= 0.0)) {
    throw std::invalid_argument("lambda_factor: requires beta > 0 and q >= 0");
  }
  // hypot and the split square root keep a^2 and q*beta from overflowing.
  const double root = std::hypot(a, std::sqrt(q) * std::sqrt(beta));
  const double lambda = a >= 0.0 ? (a + root) / beta : q / (root - a);
  if (!std::isfinite(lambda)) throw NonFiniteValue("lambda_factor: non-finite result");
  return lambda;
}

SontagController::SontagController(Clf clf, SystemModel sys, Matrix q, Matrix r)
    : clf_(std::move(clf)), sys_(std::move(sys)), q_(std::move(q)), r_(std::move(r)) {
  if (q_.rows() != sys_.state_dim() || r_.rows() != sys_.input_dim()) {
    throw std::invalid_argument("SontagController: weight dimensions do not match the system");
  }
  if (!is_positive_definite(q_)) throw BadWeights("SontagController: Q is not SPD");
  if (!is_positive_definite(r_)) throw BadWeights("SontagController: R is not SPD");
  q_ = symmetrize(q_);
  r_ = symmetrize(r_);
  r_inv_ = symmetrize(inverse(r_));
}

ControlEval sontag_control(const SontagController& ctrl, const Vector& x) {
  const SystemModel& sys = ctrl.system();
  const ValueGradient vg = clf_value_grad(ctrl.clf(), x);
  const Matrix g = sys.input_matrix(x);
  const LieDerivatives lie{vg.gradient.dot(sys.drift(x)), g.transpose() * vg.gradient};

  ControlEval out;
  if (inf_norm(lie.b) <= b_zero_tolerance(vg.gradient, g)) {
    out.u = Vector::Zero(sys.input_dim());
    out.branch = Branch::kBZero;
    out.clf_violation = !x.isZero(0.0) && !(lie.a < -kClfDecayTolerance * x.squaredNorm());
    return out;
  }
  const Vector r_inv_b = ctrl.r_inv() * lie.b;
  const double beta = lie.b.dot(r_inv_b);
  const double q = x.dot(ctrl.q() * x);
  const double lambda = lambda_factor(lie.a, q, beta);
  out.u = -lambda * r_inv_b;
  out.lambda = lambda;
  out.branch = Branch::kBNonzero;
  return out;
}

Vector lqr_control(const Matrix& k, const Vector& x) {
  if (k.cols() != x.size()) throw std::invalid_argument("lqr_control: dimension mismatch");
  return -(k * x);
}

Matrix fbl_gain_design(const FeedbackLinearization& fbl, const LqrDesign& design) {
  const Eigen::Index n = fbl.a_tilde.rows();
  const Vector zero = Vector::Zero(n);
  const Matrix gamma0 = fbl.gamma(zero);
  LuFactor check_gamma(gamma0);
  const Matrix jt0_inv = inverse(fbl.transform_jacobian_origin);
  return gamma0 * design.k * jt0_inv - psi_jacobian_origin(fbl);
}

Vector fbl_control(const FblController& ctrl, const Vector& x) {
  const Vector z = ctrl.fbl.transform(x);
  const Matrix gamma = ctrl.fbl.gamma(z);
  if (!gamma.allFinite() || gamma.cwiseAbs().maxCoeff() < kGammaFloor) {
    throw DomainViolation("fbl_control: gamma(z) is singular");
  }
  try {
    return LuFactor(gamma).solve(Vector(-ctrl.fbl.psi(z) - ctrl.k_fbl * z));
  } catch (const SingularMatrix&) {
    throw DomainViolation("fbl_control: gamma(z) is singular");
  }
}

ControlSample evaluate(const Controller& controller, const Vector& x) {
  return std::visit(Overloaded{
                        [&x](const SontagController& c) {
                          ControlEval e = sontag_control(c, x);
                          return ControlSample{std::move(e.u), e.lambda, e.clf_violation};
                        },
                        [&x](const LqrController& c) {
                          return ControlSample{lqr_control(c.k, x), std::nullopt, false};
                        },
                        [&x](const FblController& c) {
                          return ControlSample{fbl_control(c, x), std::nullopt, false};
                        },
                        [](const ZeroController& c) {
                          return ControlSample{Vector::Zero(c.input_dim), std::nullopt, false};
                        },
                    },
                    controller);
}

Vector control_input(const Controller& controller, const Vector& x) {
  return std::visit(
      Overloaded{
          [&x](const SontagController& c) { return sontag_control(c, x).u; },
          [&x](const LqrController& c) { return lqr_control(c.k, x); },
          [&x](const FblController& c) { return fbl_control(c, x); },
          [](const ZeroController& c) { return Vector(Vector::Zero(c.input_dim)); },
      },
      controller);
}

double hjb_residual(const Clf& clf, const SystemModel& sys, const Matrix& q, const Matrix& r,
                    const Vector& x) {
  const LieDerivatives lie = lie_derivatives(clf, sys, x);
  return 0.5 * x.dot(q * x) + lie.a - 0.5 * lie.b.dot(solve_linear(r, lie.b));
}

}  // namespace sontag
