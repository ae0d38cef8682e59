#include "sontag/model.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sontag/errors.hpp"
#include "test_support.hpp"

namespace sontag {
namespace {

const Plant& default_pendulum() {
  static const Plant plant = pendulum_system(PendulumParams{});
  return plant;
}

TEST(EvalDynamics, PendulumExamples) {
  const SystemModel& sys = default_pendulum().system;
  EXPECT_EQ(eval_dynamics(sys, Vector::Zero(2), Vector::Zero(1)), Vector::Zero(2));

  const Vector tilted = eval_dynamics(sys, Vector{{std::numbers::pi / 6, 0.0}}, Vector::Zero(1));
  EXPECT_NEAR(tilted(0), 0.0, 1e-15);
  EXPECT_NEAR(tilted(1), 4.905, 1e-12);

  const Vector pushed = eval_dynamics(sys, Vector::Zero(2), Vector{{2.0}});
  EXPECT_NEAR(pushed(0), 0.0, 1e-15);
  EXPECT_NEAR(pushed(1), -2.0, 1e-15);

  const Vector quarter = eval_dynamics(sys, Vector{{std::numbers::pi / 4, 0.0}}, Vector::Zero(1));
  EXPECT_NEAR(quarter(1), 9.81 * std::sqrt(2.0) / 2.0, 1e-12);
}

TEST(EvalDynamics, RawPendulumAcceptsLargeAngles) {
  // The raw dynamics are defined everywhere; only the linearizing structure is restricted.
  const Vector out = eval_dynamics(default_pendulum().system, Vector{{2.0, 0.0}}, Vector{{1.0}});
  EXPECT_TRUE(out.allFinite());
  EXPECT_FALSE(default_pendulum().fbl.in_domain(Vector{{2.0, 0.0}}));
  EXPECT_TRUE(default_pendulum().fbl.in_domain(Vector{{1.5, 0.0}}));
}

TEST(EvalDynamics, DomainAndFiniteness) {
  const SystemModel bounded(
      1, 1, [](const Vector& x) { return Vector(-x); },
      [](const Vector&) { return Matrix(Matrix::Ones(1, 1)); }, {},
      [](const Vector& x) { return std::abs(x(0)) < 1.0; });
  EXPECT_THROW(eval_dynamics(bounded, Vector{{2.0}}, Vector{{0.0}}), DomainViolation);

  const SystemModel blowup(
      1, 1, [](const Vector& x) { return Vector(x * 1e308 * 1e308); },
      [](const Vector&) { return Matrix(Matrix::Ones(1, 1)); });
  EXPECT_THROW(eval_dynamics(blowup, Vector{{1.0}}, Vector{{0.0}}), NonFiniteValue);
  EXPECT_THROW(eval_dynamics(blowup, Vector{{0.0, 1.0}}, Vector{{0.0}}), std::invalid_argument);
}

TEST(SystemModel, RejectsNonzeroDriftAtOrigin) {
  EXPECT_THROW(SystemModel(
                   1, 1, [](const Vector& x) { return Vector(x.array() + 1e-9); },
                   [](const Vector&) { return Matrix(Matrix::Ones(1, 1)); }),
               std::invalid_argument);
}

TEST(Linearize, PendulumAnalyticAndFiniteDifference) {
  const auto lin = linearize(default_pendulum().system);
  EXPECT_LE((lin.a - Matrix{{0.0, 1.0}, {9.81, 0.0}}).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((lin.b - Matrix{{0.0}, {-1.0}}).cwiseAbs().maxCoeff(), 1e-15);

  const SystemModel& sys = default_pendulum().system;
  const Matrix fd = central_difference_jacobian(
      [&](const Vector& x) { return sys.drift(x); }, Vector::Zero(2));
  EXPECT_LE((fd - lin.a).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Linearize, LtiExact) {
  const Matrix a{{0.5, -2.0}, {3.0, 0.25}};
  const Matrix b{{1.0}, {-4.0}};
  const auto lin = linearize(lti_system(a, b).system);
  EXPECT_EQ(lin.a, a);
  EXPECT_EQ(lin.b, b);
}

TEST(Linearize, PendulumLikeWithoutAnalyticJacobian) {
  const SystemModel sys(
      2, 1, [](const Vector& x) { return Vector{{x(1), -std::sin(x(0))}}; },
      [](const Vector&) { return Matrix{{0.0}, {1.0}}; });
  const auto lin = linearize(sys);
  EXPECT_LE((lin.a - Matrix{{0.0, 1.0}, {-1.0, 0.0}}).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(lin.b, (Matrix{{0.0}, {1.0}}));
}

TEST(Linearize, NonFiniteJacobianThrows) {
  const SystemModel sys(
      1, 1,
      [](const Vector& x) {
        return Vector{{x(0) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()}};
      },
      [](const Vector&) { return Matrix(Matrix::Ones(1, 1)); });
  EXPECT_THROW(linearize(sys), NonFiniteJacobian);
}

TEST(CentralDifference, SecondOrderAccuracy) {
  const VectorField fn = [](const Vector& x) {
    return Vector{{std::exp(x(0)) * std::sin(x(1)), x(0) * x(0) * x(1)}};
  };
  const Vector x{{0.7, 1.3}};
  const Matrix exact{{std::exp(0.7) * std::sin(1.3), std::exp(0.7) * std::cos(1.3)},
                     {2.0 * 0.7 * 1.3, 0.7 * 0.7}};
  const double coarse = (central_difference_jacobian(fn, x, 2e-2) - exact).cwiseAbs().maxCoeff();
  const double fine = (central_difference_jacobian(fn, x, 1e-2) - exact).cwiseAbs().maxCoeff();
  EXPECT_NEAR(coarse / fine, 4.0, 0.2);
}

TEST(Pendulum, LinearizingStructure) {
  const auto& fbl = default_pendulum().fbl;
  EXPECT_EQ(fbl.transform(Vector{{0.3, -0.2}}), (Vector{{0.3, -0.2}}));
  EXPECT_EQ(fbl.transform_jacobian_origin, Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(fbl.gamma(Vector::Zero(2))(0, 0), -1.0);
  EXPECT_EQ(fbl.a_tilde, (Matrix{{0.0, 1.0}, {0.0, 0.0}}));
  EXPECT_EQ(fbl.b_tilde, (Matrix{{0.0}, {1.0}}));
  EXPECT_NO_THROW(validate(fbl, {Vector{{1.0, 0.0}}, Vector{{-1.5, 2.0}}}));
}

TEST(Pendulum, TwoRepresentationsAgree) {
  const Plant plant = pendulum_system(PendulumParams{0.7, 9.81, 1.4, 0.2});
  auto rng = testing::make_rng(20);
  std::uniform_real_distribution<double> angle(-1.5, 1.5);
  std::uniform_real_distribution<double> other(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Vector x{{angle(rng), other(rng)}};
    const Vector u{{other(rng)}};
    const Vector direct = eval_dynamics(plant.system, x, u);
    const Vector z = plant.fbl.transform(x);
    const Vector via_fbl =
        plant.fbl.a_tilde * z + plant.fbl.b_tilde * (plant.fbl.psi(z) + plant.fbl.gamma(z) * u);
    EXPECT_LE((direct - via_fbl).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pendulum, ParameterValidation) {
  EXPECT_THROW(pendulum_system(PendulumParams{0.0, 9.81, 1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(pendulum_system(PendulumParams{1.0, -1.0, 1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(pendulum_system(PendulumParams{1.0, 9.81, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(pendulum_system(PendulumParams{1.0, 9.81, 1.0, -0.1}), std::invalid_argument);
  const Plant heavy = pendulum_system(PendulumParams{2.0, 9.81, 0.5, 0.25});
  // G(0) = -mL/(J + mL^2) = -1/(0.25 + 0.5)
  EXPECT_NEAR(heavy.system.input_matrix(Vector::Zero(2))(1, 0), -1.0 / 0.75, 1e-15);
}

TEST(FeedbackLinearizationValidate, RejectsBrokenStructures) {
  FeedbackLinearization fbl = default_pendulum().fbl;
  fbl.transform = [](const Vector& x) { return Vector(x.array() + 1.0); };
  EXPECT_THROW(validate(fbl), std::invalid_argument);

  fbl = default_pendulum().fbl;
  fbl.psi = [](const Vector&) { return Vector{{0.5}}; };
  EXPECT_THROW(validate(fbl), std::invalid_argument);

  fbl = default_pendulum().fbl;
  fbl.transform_jacobian_origin = Matrix{{1.0, 1.0}, {1.0, 1.0}};
  EXPECT_THROW(validate(fbl), std::invalid_argument);

  fbl = default_pendulum().fbl;
  fbl.domain = {};
  EXPECT_THROW(validate(fbl, {Vector{{std::numbers::pi / 2, 0.0}}}), std::invalid_argument);
}

}  // namespace
}  // namespace sontag
