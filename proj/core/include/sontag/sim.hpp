#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sontag/clf.hpp"
#include "sontag/control.hpp"
#include "sontag/model.hpp"

namespace sontag {

struct SimConfig {
  double step = 0.01;  // s
  int steps = 1500;
  Vector x0;
  bool record_clf = true;
  // Hold u(x_k) over the whole step instead of re-evaluating the controller
  // at every Runge-Kutta stage.
  bool zero_order_hold = false;
};

void validate(const SimConfig& cfg, int state_dim);

enum StepFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagClfViolation = 1u << 0,
  kFlagDomainViolation = 1u << 1,
  kFlagDiverged = 1u << 2,
  kFlagNonFinite = 1u << 3,
};

std::string describe_flags(std::uint32_t flags);

inline constexpr double kDivergenceBound = 1e6;
inline constexpr double kStabilizedBound = 1e-2;

/// Samples of a closed-loop run. states has one more entry than inputs; a
/// halted run (divergence, non-finite state, domain violation) stops early
/// and carries the reason in the flags of its last state.
struct Trajectory {
  double step = 0.0;
  int input_dim = 0;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;                  // u_k at step starts
  std::vector<double> clf_values;              // V(x_k); empty without a CLF
  std::vector<std::optional<double>> lambdas;  // lambda(x_k) per input
  std::vector<std::uint32_t> flags;            // per state
  bool halted = false;
  bool stabilized = false;
};

/// One classical RK4 step of x' = f(x) + G(x) u(x), with the controller
/// evaluated at each of the four stage states.
Vector rk4_step(const SystemModel& sys, const Controller& controller, const Vector& x, double h);

/// RK4 step with the input held constant over the step.
Vector rk4_step_held(const SystemModel& sys, const Vector& u, const Vector& x, double h);

Trajectory simulate(const SystemModel& sys, const Controller& controller, const SimConfig& cfg,
                    const Clf* clf = nullptr);

/// (h/2) sum_k x_k^T Q x_k + u_k^T R u_k over the recorded inputs; +inf for a
/// halted trajectory.
double cost_index(const Trajectory& traj, const Matrix& q, const Matrix& r, double h);

struct DistortedCost {
  double value = 0.0;
  int fallback_count = 0;  // samples where lambda was undefined and 1 was used
};

/// (h/2) sum_k (x_k^T Q x_k + u_k^T R u_k) / lambda_k. Throws
/// NonPositiveLambda if any recorded lambda is <= 0.
DistortedCost distorted_cost(const Trajectory& traj, const Matrix& q, const Matrix& r, double h);

/// Largest normalized mismatch |dV/dt_fd - dV/dt| / (1 + |dV/dt|) over the
/// interior samples, with dV/dt_fd the central difference of V along the
/// trajectory and dV/dt = -sqrt(a^2 + x^T Q x b R^-1 b^T) (a where b = 0).
double lyap_decay_check(const Trajectory& traj, const Clf& clf, const SystemModel& sys,
                        const Matrix& q, const Matrix& r);

struct CostReport {
  double j_quadratic = 0.0;
  std::optional<double> j_distorted;  // only when lambdas were recorded
  int lambda_fallback_count = 0;
  bool stabilized = false;
};

CostReport cost_report(const Trajectory& traj, const Matrix& q, const Matrix& r);

/// Header t,x1..xn,u1..um,V,lambda,flags; 17 significant digits; empty
/// fields for missing values.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace sontag
