#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "sontag/clf.hpp"
#include "sontag/control.hpp"
#include "sontag/model.hpp"
#include "sontag/sim.hpp"

namespace sontag {

// All grid checks here are sampled evaluations of the Lyapunov decrease
// condition, not formal certificates of the continuum sets.

/// Tensor grid; the last axis varies fastest.
struct GridSpec {
  Vector lower;
  Vector upper;
  std::vector<int> points_per_axis;

  std::size_t size() const;
  Vector point(std::size_t index) const;
};

/// Throws std::invalid_argument unless lower < upper and >= 2 points per axis.
void validate(const GridSpec& grid);

/// Strict decrease threshold for grid membership: V_dot < -1e-12.
inline constexpr double kDecreaseThreshold = 1e-12;

/// grad V(x) . (f(x) + G(x) u(x)) under a controller.
double clf_derivative(const Clf& clf, const SystemModel& sys, const Controller& controller,
                      const Vector& x);

struct RoaPoint {
  std::size_t index = 0;
  Vector x;
  double value = 0.0;
  bool member_lqr = false;
  bool member_sontag = false;
};

/// Sampled versions of {x != 0, V(x) <= C, V_dot(x) < 0} under the LQR and
/// the Sontag-type law.
struct RoaCertificate {
  double level = 0.0;
  GridSpec grid;
  std::vector<std::size_t> members_lqr;     // flat grid indices, ascending
  std::vector<std::size_t> members_sontag;  // flat grid indices, ascending
  bool subset_holds = true;                 // members_lqr within members_sontag
  std::vector<RoaPoint> points;             // every nonzero grid point
};

RoaCertificate roa_certify(const SystemModel& sys, const Clf& clf, const Controller& lqr,
                           const Controller& sontag, const GridSpec& grid, double level,
                           int threads = 1);

/// Largest C (40-step bisection) such that every nonzero grid point with
/// V <= C strictly decreases V under the controller. The whole-grid maximum of
/// V when every point passes; 0 when the innermost point already fails.
double largest_certified_sublevel(const SystemModel& sys, const Clf& clf,
                                  const Controller& controller, const GridSpec& grid,
                                  int threads = 1);

struct GlobalClfReport {
  std::size_t checked = 0;
  std::vector<Vector> violations;
};

/// Checks alpha(z) < 0 or beta(z) != 0 at every nonzero grid point, where
/// alpha(z) = 1/2 z^T (A~^T P~ + P~ A~) z and beta(z) = z^T P~ B~. beta counts
/// as zero below 1e-9 |P~|_inf |B~|_1 |z|_inf.
GlobalClfReport global_clf_sample_check(const FeedbackLinearization& fbl, const Matrix& p_tilde,
                                        const GridSpec& grid);

struct SweepConfig {
  SimConfig sim;  // x0 is replaced per row
  int n_angles = 1000;
  double theta_min_deg = 0.0;
  double theta_max_deg = 89.0;
  int threads = 1;
};

struct SweepRow {
  double theta0_deg = 0.0;
  double j_sontag = 0.0;
  double j_lqr = 0.0;
  double j_fbl = 0.0;
  std::optional<double> ratio_lqr;  // only when the LQR run stabilized
  std::optional<double> ratio_fbl;  // only when the FBL run stabilized
  bool stab_sontag = false;
  bool stab_lqr = false;
  bool stab_fbl = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Simulates each controller from x0 = (theta0, 0, ...) for equidistant
/// theta0 over [theta_min_deg, theta_max_deg]. Rows are in angle order
/// regardless of the worker count.
SweepResult sweep_initial_angles(const SystemModel& sys, const Controller& sontag,
                                 const Controller& lqr, const Controller& fbl, const Matrix& q,
                                 const Matrix& r, const SweepConfig& cfg);

void write_sweep_csv(std::ostream& os, const SweepResult& result);
void write_roa_csv(std::ostream& os, const RoaCertificate& cert);

}  // namespace sontag
