#include "sontag/riccati.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "sontag/errors.hpp"
#include "test_support.hpp"

namespace sontag {
namespace {

// Residual recomputed with Eigen's own inverse, independent of the library.
double relative_residual(const LqrDesign& d) {
  const Matrix res = d.a.transpose() * d.p + d.p * d.a -
                     d.p * d.b * d.r.inverse() * d.b.transpose() * d.p + d.q;
  return res.cwiseAbs().rowwise().sum().maxCoeff() / d.q.cwiseAbs().rowwise().sum().maxCoeff();
}

TEST(SolveCare, DoubleIntegrator) {
  const LqrDesign d = solve_care(Matrix{{0.0, 1.0}, {0.0, 0.0}}, Matrix{{0.0}, {1.0}},
                                 Matrix::Identity(2, 2), Matrix{{1.0}});
  const double s3 = std::sqrt(3.0);
  EXPECT_LE((d.p - Matrix{{s3, 1.0}, {1.0, s3}}).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(d.k(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(d.k(0, 1), s3, 1e-9);
  EXPECT_LT(relative_residual(d), 1e-10);
}

TEST(SolveCare, ScalarCases) {
  // -P^2 + 1 = 0
  EXPECT_NEAR(solve_care(Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}).p(0, 0), 1.0,
              1e-12);
  // 2P - P^2 + 1 = 0, positive root
  EXPECT_NEAR(solve_care(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}).p(0, 0),
              1.0 + std::sqrt(2.0), 1e-12);
}

TEST(SolveCare, RejectsBadWeights) {
  const Matrix a{{0.0, 1.0}, {0.0, 0.0}};
  const Matrix b{{0.0}, {1.0}};
  EXPECT_THROW(solve_care(a, b, Matrix{{1.0, 2.0}, {2.0, 1.0}}, Matrix{{1.0}}), BadWeights);
  EXPECT_THROW(solve_care(a, b, Matrix::Identity(2, 2), Matrix{{0.0}}), BadWeights);
  EXPECT_THROW(solve_care(a, b, Matrix{{1.0, 0.5}, {0.0, 1.0}}, Matrix{{1.0}}), BadWeights);
}

TEST(SolveCare, RejectsNonConformable) {
  EXPECT_THROW(solve_care(Matrix::Zero(2, 2), Matrix::Ones(3, 1), Matrix::Identity(2, 2),
                          Matrix::Identity(1, 1)),
               std::invalid_argument);
}

TEST(SolveCare, UnstabilizableThrows) {
  EXPECT_THROW(solve_care(Matrix::Identity(2, 2), Matrix{{1.0}, {0.0}}, Matrix::Identity(2, 2),
                          Matrix{{1.0}}),
               NotStabilizable);
}

TEST(Stabilizability, Examples) {
  EXPECT_TRUE(stabilizability_check(Matrix{{0.0, 1.0}, {0.0, 0.0}}, Matrix{{0.0}, {1.0}}));
  // Second mode unstable and unreachable from the input.
  EXPECT_FALSE(stabilizability_check(Matrix::Identity(2, 2), Matrix{{1.0}, {0.0}}));
  // Unstable mode controllable, stable mode decays on its own.
  EXPECT_TRUE(stabilizability_check(Matrix{{-1.0, 0.0}, {0.0, 1.0}}, Matrix{{0.0}, {1.0}}));
  EXPECT_FALSE(stabilizability_check(Matrix::Identity(2, 2), Matrix::Zero(2, 1)));
  // Undamped oscillator with no input: eigenvalues on the imaginary axis.
  EXPECT_FALSE(stabilizability_check(Matrix{{0.0, 1.0}, {-1.0, 0.0}}, Matrix::Zero(2, 1)));
}

TEST(SolveCare, RandomInstancesSatisfyInvariants) {
  auto rng = testing::make_rng(10);
  for (int t = 0; t < 60; ++t) {
    const auto inst = testing::random_lqr_instance(rng);
    const LqrDesign d = solve_care(inst.a, inst.b, inst.q, inst.r);
    const double p_scale = d.p.cwiseAbs().maxCoeff();
    EXPECT_LE((d.p - d.p.transpose()).cwiseAbs().maxCoeff(), 1e-10 * p_scale);
    EXPECT_TRUE(Eigen::LLT<Matrix>(d.p).info() == Eigen::Success);
    EXPECT_LE(relative_residual(d), 1e-8) << "n=" << inst.a.rows() << " m=" << inst.b.cols();
    EXPECT_TRUE(testing::eigen_hurwitz(d.a - d.b * d.k));
    EXPECT_LE((d.p - inst.p).cwiseAbs().maxCoeff(), 1e-7 * p_scale);
    EXPECT_LE((d.k - d.r.inverse() * d.b.transpose() * d.p).cwiseAbs().maxCoeff(),
              1e-9 * (1.0 + d.k.cwiseAbs().maxCoeff()));
  }
}

TEST(SolveCare, WeightScalingScalesPAndKeepsK) {
  auto rng = testing::make_rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto inst = testing::random_lqr_instance(rng);
    const double c = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    const LqrDesign base = solve_care(inst.a, inst.b, inst.q, inst.r);
    const LqrDesign scaled = solve_care(inst.a, inst.b, c * inst.q, c * inst.r);
    EXPECT_LE((scaled.p - c * base.p).cwiseAbs().maxCoeff(),
              1e-8 * c * base.p.cwiseAbs().maxCoeff());
    EXPECT_LE((scaled.k - base.k).cwiseAbs().maxCoeff(),
              1e-8 * (1.0 + base.k.cwiseAbs().maxCoeff()));
  }
}

}  // namespace
}  // namespace sontag
