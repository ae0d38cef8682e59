#include "sontag/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "sontag/errors.hpp"

namespace sontag {
namespace {

constexpr double kEquilibriumTolerance = 1e-12;
constexpr double kPivotFloor = 1e-12;

}  // namespace

SystemModel::SystemModel(int state_dim, int input_dim, VectorField drift, MatrixField input_matrix,
                         MatrixField drift_jacobian, StatePredicate domain)
    : n_(state_dim),
      m_(input_dim),
      f_(std::move(drift)),
      g_(std::move(input_matrix)),
      df_(std::move(drift_jacobian)),
      domain_(std::move(domain)) {
  if (n_ < 1 || m_ < 1) throw std::invalid_argument("SystemModel: dimensions must be >= 1");
  if (!f_ || !g_) throw std::invalid_argument("SystemModel: drift and input matrix are required");
  const Vector zero = Vector::Zero(n_);
  const Vector f0 = f_(zero);
  const Matrix g0 = g_(zero);
  if (f0.size() != n_) throw std::invalid_argument("SystemModel: drift has wrong dimension");
  if (g0.rows() != n_ || g0.cols() != m_) {
    throw std::invalid_argument("SystemModel: input matrix has wrong shape");
  }
  if (!f0.allFinite() || inf_norm(f0) > kEquilibriumTolerance) {
    throw std::invalid_argument("SystemModel: origin is not an equilibrium (f(0) != 0)");
  }
}

void validate(const FeedbackLinearization& fbl, const std::vector<Vector>& samples) {
  if (!fbl.transform || !fbl.psi || !fbl.gamma) {
    throw std::invalid_argument("FeedbackLinearization: T, psi and gamma are required");
  }
  const Eigen::Index n = fbl.a_tilde.rows();
  const Eigen::Index m = fbl.b_tilde.cols();
  if (fbl.a_tilde.cols() != n || fbl.b_tilde.rows() != n ||
      fbl.transform_jacobian_origin.rows() != n || fbl.transform_jacobian_origin.cols() != n) {
    throw std::invalid_argument("FeedbackLinearization: inconsistent dimensions");
  }
  const Vector zero = Vector::Zero(n);
  if (inf_norm(fbl.transform(zero)) > kEquilibriumTolerance) {
    throw std::invalid_argument("FeedbackLinearization: T(0) != 0");
  }
  const Vector psi0 = fbl.psi(zero);
  if (psi0.size() != m || inf_norm(psi0) > kEquilibriumTolerance) {
    throw std::invalid_argument("FeedbackLinearization: psi(0) != 0");
  }
  try {
    LuFactor check_jt(fbl.transform_jacobian_origin);
    const Matrix gamma0 = fbl.gamma(zero);
    LuFactor check_gamma(gamma0);
    const double floor = kPivotFloor * gamma0.cwiseAbs().maxCoeff();
    for (const Vector& x : samples) {
      if (!fbl.in_domain(x)) continue;
      const Matrix g = fbl.gamma(fbl.transform(x));
      if (!g.allFinite() || !(g.cwiseAbs().maxCoeff() >= floor)) {
        throw std::invalid_argument("FeedbackLinearization: gamma vanishes at a sample");
      }
      LuFactor check(g);
    }
  } catch (const Error& e) {
    throw std::invalid_argument(std::string("FeedbackLinearization: ") + e.what());
  }
}

Matrix transform_jacobian(const FeedbackLinearization& fbl, const Vector& x) {
  if (fbl.transform_jacobian) return fbl.transform_jacobian(x);
  return central_difference_jacobian(fbl.transform, x);
}

Matrix psi_jacobian_origin(const FeedbackLinearization& fbl) {
  const Vector zero = Vector::Zero(fbl.a_tilde.rows());
  if (fbl.psi_jacobian) return fbl.psi_jacobian(zero);
  return central_difference_jacobian(fbl.psi, zero);
}

void validate(const PendulumParams& p) {
  if (!(p.mass > 0.0) || !(p.gravity > 0.0) || !(p.length > 0.0) || !(p.inertia >= 0.0)) {
    throw std::invalid_argument("PendulumParams: require mass, gravity, length > 0 and inertia >= 0");
  }
  if (!(p.inertia + p.mass * p.length * p.length > 0.0)) {
    throw std::invalid_argument("PendulumParams: J + m L^2 must be positive");
  }
}

Plant pendulum_system(const PendulumParams& p) {
  validate(p);
  const double denom = p.inertia + p.mass * p.length * p.length;
  const double drift_gain = p.mass * p.gravity * p.length / denom;
  const double input_gain = -p.mass * p.length / denom;

  auto f = [drift_gain](const Vector& x) {
    return Vector{{x(1), drift_gain * std::sin(x(0))}};
  };
  auto g = [input_gain](const Vector& x) {
    return Matrix{{0.0}, {input_gain * std::cos(x(0))}};
  };
  auto df = [drift_gain](const Vector& x) {
    return Matrix{{0.0, 1.0}, {drift_gain * std::cos(x(0)), 0.0}};
  };
  SystemModel system(2, 1, f, g, df);

  FeedbackLinearization fbl;
  fbl.transform = [](const Vector& x) { return x; };
  fbl.transform_jacobian = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
  fbl.transform_jacobian_origin = Matrix::Identity(2, 2);
  fbl.psi = [drift_gain](const Vector& z) { return Vector{{drift_gain * std::sin(z(0))}}; };
  fbl.psi_jacobian = [drift_gain](const Vector& z) {
    return Matrix{{drift_gain * std::cos(z(0)), 0.0}};
  };
  fbl.gamma = [input_gain](const Vector& z) { return Matrix{{input_gain * std::cos(z(0))}}; };
  fbl.a_tilde = Matrix{{0.0, 1.0}, {0.0, 0.0}};
  fbl.b_tilde = Matrix{{0.0}, {1.0}};
  fbl.domain = [](const Vector& x) { return std::abs(x(0)) < std::numbers::pi / 2.0; };
  fbl.domain_description = "|theta| < pi/2";
  validate(fbl);

  return Plant{"pendulum", std::move(system), std::move(fbl)};
}

Plant lti_system(const Matrix& a, const Matrix& b) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (a.cols() != n || b.rows() != n || n == 0 || m == 0) {
    throw std::invalid_argument("lti_system: non-conformable A, B");
  }
  if (!a.allFinite() || !b.allFinite()) throw std::invalid_argument("lti_system: non-finite entry");

  SystemModel system(
      static_cast<int>(n), static_cast<int>(m), [a](const Vector& x) { return Vector(a * x); },
      [b](const Vector&) { return b; }, [a](const Vector&) { return a; });

  FeedbackLinearization fbl;
  fbl.transform = [](const Vector& x) { return x; };
  fbl.transform_jacobian = [n](const Vector&) { return Matrix(Matrix::Identity(n, n)); };
  fbl.transform_jacobian_origin = Matrix::Identity(n, n);
  fbl.psi = [m](const Vector&) { return Vector(Vector::Zero(m)); };
  fbl.psi_jacobian = [n, m](const Vector&) { return Matrix(Matrix::Zero(m, n)); };
  fbl.gamma = [m](const Vector&) { return Matrix(Matrix::Identity(m, m)); };
  fbl.a_tilde = a;
  fbl.b_tilde = b;
  fbl.domain_description = "all states";
  validate(fbl);

  return Plant{"lti", std::move(system), std::move(fbl)};
}

Vector eval_dynamics(const SystemModel& sys, const Vector& x, const Vector& u) {
  if (x.size() != sys.state_dim() || u.size() != sys.input_dim()) {
    throw std::invalid_argument("eval_dynamics: dimension mismatch");
  }
  if (!sys.in_domain(x)) throw DomainViolation("eval_dynamics: state outside model domain");
  Vector dx = sys.drift(x) + sys.input_matrix(x) * u;
  if (!dx.allFinite()) throw NonFiniteValue("eval_dynamics: non-finite derivative");
  return dx;
}

Matrix central_difference_jacobian(const VectorField& fn, const Vector& x, double rel_step) {
  const Vector f0 = fn(x);
  Matrix jac(f0.size(), x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + h;
    const Vector plus = fn(probe);
    probe(i) = x(i) - h;
    const Vector minus = fn(probe);
    probe(i) = x(i);
    jac.col(i) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

Linearization linearize(const SystemModel& sys) {
  const Vector zero = Vector::Zero(sys.state_dim());
  Linearization lin;
  lin.a = sys.has_drift_jacobian()
              ? sys.drift_jacobian(zero)
              : central_difference_jacobian([&sys](const Vector& x) { return sys.drift(x); }, zero);
  lin.b = sys.input_matrix(zero);
  if (!lin.a.allFinite() || !lin.b.allFinite()) {
    throw NonFiniteJacobian("linearize: non-finite Jacobian at the origin");
  }
  return lin;
}

}  // namespace sontag
