#include "sontag/clf.hpp"

#include <stdexcept>
#include <utility>

#include "overloaded.hpp"
#include "sontag/errors.hpp"

namespace sontag {

using detail::Overloaded;

QuadraticClf::QuadraticClf(Matrix p) : p_(std::move(p)) {
  cholesky_pd(p_);
  p_ = symmetrize(p_);
}

TransformedClf::TransformedClf(Matrix p_tilde, FeedbackLinearization fbl)
    : p_tilde_(std::move(p_tilde)), fbl_(std::move(fbl)) {
  cholesky_pd(p_tilde_);
  p_tilde_ = symmetrize(p_tilde_);
  if (p_tilde_.rows() != fbl_.a_tilde.rows()) {
    throw std::invalid_argument("TransformedClf: P~ does not match the transformed state dimension");
  }
}

ValueGradient clf_value_grad(const Clf& clf, const Vector& x) {
  return std::visit(
      Overloaded{
          [&x](const QuadraticClf& c) {
            if (x.size() != c.p().rows()) throw std::invalid_argument("clf: dimension mismatch");
            Vector px = c.p() * x;
            return ValueGradient{0.5 * x.dot(px), std::move(px)};
          },
          [&x](const TransformedClf& c) {
            if (x.size() != c.p_tilde().rows()) {
              throw std::invalid_argument("clf: dimension mismatch");
            }
            if (!c.fbl().in_domain(x)) {
              throw DomainViolation("transformed CLF evaluated outside " +
                                    c.fbl().domain_description);
            }
            const Vector z = c.fbl().transform(x);
            const Vector pz = c.p_tilde() * z;
            return ValueGradient{0.5 * z.dot(pz),
                                 transform_jacobian(c.fbl(), x).transpose() * pz};
          },
      },
      clf);
}

double clf_value(const Clf& clf, const Vector& x) { return clf_value_grad(clf, x).value; }

const Matrix& clf_matrix(const Clf& clf) {
  return std::visit(Overloaded{[](const QuadraticClf& c) -> const Matrix& { return c.p(); },
                               [](const TransformedClf& c) -> const Matrix& {
                                 return c.p_tilde();
                               }},
                    clf);
}

LieDerivatives lie_derivatives(const Clf& clf, const SystemModel& sys, const Vector& x) {
  const ValueGradient vg = clf_value_grad(clf, x);
  return LieDerivatives{vg.gradient.dot(sys.drift(x)),
                        sys.input_matrix(x).transpose() * vg.gradient};
}

double b_zero_tolerance(const Vector& gradient, const Matrix& input_matrix) {
  const double g_norm =
      input_matrix.size() == 0 ? 0.0 : input_matrix.cwiseAbs().colwise().sum().maxCoeff();
  return kClfDecayTolerance * inf_norm(gradient) * g_norm;
}

bool clf_condition_at(const LieDerivatives& lie, const Vector& x, double tol_b, double tol_a) {
  if (inf_norm(lie.b) > tol_b) return true;
  return lie.a < -tol_a * x.squaredNorm();
}

bool clf_condition_at(const Clf& clf, const SystemModel& sys, const Vector& x) {
  const ValueGradient vg = clf_value_grad(clf, x);
  const Matrix g = sys.input_matrix(x);
  const LieDerivatives lie{vg.gradient.dot(sys.drift(x)), g.transpose() * vg.gradient};
  return clf_condition_at(lie, x, b_zero_tolerance(vg.gradient, g), kClfDecayTolerance);
}

Matrix transform_P(const Matrix& p, const Matrix& jt0) {
  if (p.rows() != jt0.rows() || p.cols() != jt0.cols()) {
    throw std::invalid_argument("transform_P: dimension mismatch");
  }
  const Matrix jt0_inv = inverse(jt0);
  return symmetrize(jt0_inv.transpose() * p * jt0_inv);
}

QuadraticClf build_lqr_clf(const LqrDesign& design) { return QuadraticClf(design.p); }

TransformedClf build_global_clf(const LqrDesign& design, const FeedbackLinearization& fbl) {
  return TransformedClf(transform_P(design.p, fbl.transform_jacobian_origin), fbl);
}

}  // namespace sontag
