#include "sontag/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "sontag/errors.hpp"

namespace sontag {
namespace {

constexpr int kBisectionSteps = 40;

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
// written by exactly one worker, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::clamp<std::size_t>(threads > 0 ? static_cast<std::size_t>(threads) : 1, 1,
                              std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, w, workers, count] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
}

struct Sample {
  bool skip = true;  // the origin
  double value = 0.0;
  bool decreasing = false;
};

std::vector<Sample> sample_decrease(const SystemModel& sys, const Clf& clf,
                                    const Controller& controller, const GridSpec& grid,
                                    int threads) {
  std::vector<Sample> samples(grid.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    const Vector x = grid.point(i);
    if (x.isZero(0.0)) return;
    Sample& s = samples[i];
    s.skip = false;
    s.value = clf_value(clf, x);
    try {
      s.decreasing = clf_derivative(clf, sys, controller, x) < -kDecreaseThreshold;
    } catch (const DomainViolation&) {
      s.decreasing = false;
    }
  });
  return samples;
}

void append_number(std::string& line, double v) {
  fmt::format_to(std::back_inserter(line), "{:.17g}", v);
}

}  // namespace

std::size_t GridSpec::size() const {
  std::size_t total = 1;
  for (int p : points_per_axis) total *= static_cast<std::size_t>(std::max(p, 0));
  return points_per_axis.empty() ? 0 : total;
}

Vector GridSpec::point(std::size_t index) const {
  const auto dims = static_cast<Eigen::Index>(points_per_axis.size());
  Vector x(dims);
  for (Eigen::Index d = dims - 1; d >= 0; --d) {
    const auto count = static_cast<std::size_t>(points_per_axis[static_cast<std::size_t>(d)]);
    const std::size_t j = index % count;
    index /= count;
    const double t = static_cast<double>(j) / static_cast<double>(count - 1);
    // Convex combination so symmetric grids with an odd count hit 0 exactly.
    x(d) = lower(d) * (1.0 - t) + upper(d) * t;
  }
  return x;
}

void validate(const GridSpec& grid) {
  const auto dims = static_cast<Eigen::Index>(grid.points_per_axis.size());
  if (dims == 0 || grid.lower.size() != dims || grid.upper.size() != dims) {
    throw std::invalid_argument("GridSpec: lower, upper and points_per_axis must agree");
  }
  for (Eigen::Index d = 0; d < dims; ++d) {
    if (!(grid.lower(d) < grid.upper(d))) {
      throw std::invalid_argument("GridSpec: lower must be below upper on every axis");
    }
    if (grid.points_per_axis[static_cast<std::size_t>(d)] < 2) {
      throw std::invalid_argument("GridSpec: need at least 2 points per axis");
    }
  }
}

double clf_derivative(const Clf& clf, const SystemModel& sys, const Controller& controller,
                      const Vector& x) {
  const ValueGradient vg = clf_value_grad(clf, x);
  const Vector u = control_input(controller, x);
  return vg.gradient.dot(sys.drift(x) + sys.input_matrix(x) * u);
}

RoaCertificate roa_certify(const SystemModel& sys, const Clf& clf, const Controller& lqr,
                           const Controller& sontag, const GridSpec& grid, double level,
                           int threads) {
  validate(grid);
  if (!(level >= 0.0)) throw std::invalid_argument("roa_certify: level must be >= 0");

  std::vector<RoaPoint> points(grid.size());
  std::vector<char> keep(grid.size(), 0);
  parallel_for(points.size(), threads, [&](std::size_t i) {
    RoaPoint& p = points[i];
    p.index = i;
    p.x = grid.point(i);
    if (p.x.isZero(0.0)) return;
    keep[i] = 1;
    p.value = clf_value(clf, p.x);
    if (p.value > level) return;
    auto decreasing = [&](const Controller& c) {
      try {
        return clf_derivative(clf, sys, c, p.x) < -kDecreaseThreshold;
      } catch (const DomainViolation&) {
        return false;
      }
    };
    p.member_lqr = decreasing(lqr);
    p.member_sontag = decreasing(sontag);
  });

  RoaCertificate cert;
  cert.level = level;
  cert.grid = grid;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!keep[i]) continue;
    if (points[i].member_lqr) cert.members_lqr.push_back(i);
    if (points[i].member_sontag) cert.members_sontag.push_back(i);
    cert.points.push_back(std::move(points[i]));
  }
  cert.subset_holds = std::includes(cert.members_sontag.begin(), cert.members_sontag.end(),
                                    cert.members_lqr.begin(), cert.members_lqr.end());
  return cert;
}

double largest_certified_sublevel(const SystemModel& sys, const Clf& clf,
                                  const Controller& controller, const GridSpec& grid,
                                  int threads) {
  validate(grid);
  const std::vector<Sample> samples = sample_decrease(sys, clf, controller, grid, threads);

  double v_min = std::numeric_limits<double>::infinity();
  double v_max = 0.0;
  for (const Sample& s : samples) {
    if (s.skip) continue;
    v_min = std::min(v_min, s.value);
    v_max = std::max(v_max, s.value);
  }
  if (!std::isfinite(v_min)) return 0.0;

  auto certified = [&samples](double level) {
    return std::all_of(samples.begin(), samples.end(), [level](const Sample& s) {
      return s.skip || s.value > level || s.decreasing;
    });
  };
  if (certified(v_max)) return v_max;

  double lo = 0.0;
  double hi = v_max;
  for (int it = 0; it < kBisectionSteps; ++it) {
    const double mid = 0.5 * (lo + hi);
    (certified(mid) ? lo : hi) = mid;
  }
  // A level below every grid point certifies nothing.
  return lo < v_min ? 0.0 : lo;
}

GlobalClfReport global_clf_sample_check(const FeedbackLinearization& fbl, const Matrix& p_tilde,
                                        const GridSpec& grid) {
  validate(grid);
  const Matrix& a = fbl.a_tilde;
  const Matrix& b = fbl.b_tilde;
  if (p_tilde.rows() != a.rows() || p_tilde.cols() != a.cols() ||
      static_cast<Eigen::Index>(grid.points_per_axis.size()) != a.rows()) {
    throw std::invalid_argument("global_clf_sample_check: dimension mismatch");
  }
  const Matrix sym = a.transpose() * p_tilde + p_tilde * a;
  const Matrix pb = p_tilde * b;
  const double tol = kClfDecayTolerance * inf_norm(p_tilde) * b.cwiseAbs().colwise().sum().maxCoeff();

  GlobalClfReport report;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vector z = grid.point(i);
    if (z.isZero(0.0)) continue;
    ++report.checked;
    const double alpha = 0.5 * z.dot(sym * z);
    const Vector beta = pb.transpose() * z;
    if (!(alpha < 0.0 || inf_norm(beta) > tol * inf_norm(z))) report.violations.push_back(z);
  }
  return report;
}

SweepResult sweep_initial_angles(const SystemModel& sys, const Controller& sontag,
                                 const Controller& lqr, const Controller& fbl, const Matrix& q,
                                 const Matrix& r, const SweepConfig& cfg) {
  if (cfg.n_angles < 1) throw std::invalid_argument("sweep: n_angles must be >= 1");
  if (!(cfg.theta_min_deg <= cfg.theta_max_deg)) {
    throw std::invalid_argument("sweep: empty angle range");
  }

  SweepResult result;
  result.rows.resize(static_cast<std::size_t>(cfg.n_angles));
  const double span = cfg.theta_max_deg - cfg.theta_min_deg;
  const double h = cfg.sim.step;

  auto ratio = [](double num, double den, bool den_stable) -> std::optional<double> {
    if (!den_stable) return std::nullopt;
    if (num == 0.0 && den == 0.0) return 1.0;
    return num / den;
  };

  parallel_for(result.rows.size(), cfg.threads, [&](std::size_t i) {
    SweepRow& row = result.rows[i];
    row.theta0_deg = cfg.n_angles == 1
                         ? cfg.theta_min_deg
                         : cfg.theta_min_deg +
                               span * static_cast<double>(i) / static_cast<double>(cfg.n_angles - 1);
    SimConfig sim = cfg.sim;
    sim.x0 = Vector::Zero(sys.state_dim());
    sim.x0(0) = row.theta0_deg * std::numbers::pi / 180.0;
    sim.record_clf = false;

    auto run = [&](const Controller& c, double& cost, bool& stable) {
      const Trajectory traj = simulate(sys, c, sim);
      cost = cost_index(traj, q, r, h);
      stable = traj.stabilized;
    };
    run(sontag, row.j_sontag, row.stab_sontag);
    run(lqr, row.j_lqr, row.stab_lqr);
    run(fbl, row.j_fbl, row.stab_fbl);
    row.ratio_lqr = ratio(row.j_sontag, row.j_lqr, row.stab_lqr);
    row.ratio_fbl = ratio(row.j_sontag, row.j_fbl, row.stab_fbl);
  });
  return result;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << "theta0_deg,J_sontag,J_lqr,J_fbl,ratio_lqr,ratio_fbl,stab_sontag,stab_lqr,stab_fbl\n";
  std::string line;
  for (const SweepRow& row : result.rows) {
    line.clear();
    append_number(line, row.theta0_deg);
    for (double j : {row.j_sontag, row.j_lqr, row.j_fbl}) {
      line += ',';
      append_number(line, j);
    }
    for (const auto& ratio : {row.ratio_lqr, row.ratio_fbl}) {
      line += ',';
      if (ratio) append_number(line, *ratio);
    }
    for (bool stable : {row.stab_sontag, row.stab_lqr, row.stab_fbl}) {
      line += stable ? ",1" : ",0";
    }
    line += '\n';
    os << line;
  }
}

void write_roa_csv(std::ostream& os, const RoaCertificate& cert) {
  const auto dims = static_cast<Eigen::Index>(cert.grid.points_per_axis.size());
  std::string line;
  for (Eigen::Index d = 0; d < dims; ++d) line += fmt::format("x{},", d + 1);
  line += "V,member_lqr,member_sontag\n";
  os << line;
  for (const RoaPoint& p : cert.points) {
    line.clear();
    for (Eigen::Index d = 0; d < dims; ++d) {
      append_number(line, p.x(d));
      line += ',';
    }
    append_number(line, p.value);
    line += p.member_lqr ? ",1" : ",0";
    line += p.member_sontag ? ",1" : ",0";
    line += '\n';
    os << line;
  }
}

}  // namespace sontag
