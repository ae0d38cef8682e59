#include "sontag/sim.hpp"

#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "sontag/errors.hpp"

namespace sontag {
namespace {

Vector closed_loop_rhs(const SystemModel& sys, const Vector& x, const Vector& u) {
  if (!sys.in_domain(x)) throw DomainViolation("state left the model domain");
  return sys.drift(x) + sys.input_matrix(x) * u;
}

template <class InputFn>
Vector rk4(const SystemModel& sys, InputFn&& input, const Vector& x, double h) {
  const Vector k1 = closed_loop_rhs(sys, x, input(x));
  Vector stage = x + 0.5 * h * k1;
  const Vector k2 = closed_loop_rhs(sys, stage, input(stage));
  stage = x + 0.5 * h * k2;
  const Vector k3 = closed_loop_rhs(sys, stage, input(stage));
  stage = x + h * k3;
  const Vector k4 = closed_loop_rhs(sys, stage, input(stage));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void append_number(std::string& line, double v) { fmt::format_to(std::back_inserter(line), "{:.17g}", v); }

}  // namespace

void validate(const SimConfig& cfg, int state_dim) {
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) {
    throw std::invalid_argument("SimConfig: step must be positive");
  }
  if (cfg.steps < 1) throw std::invalid_argument("SimConfig: steps must be >= 1");
  if (cfg.x0.size() != state_dim) throw std::invalid_argument("SimConfig: x0 has wrong dimension");
  if (!cfg.x0.allFinite()) throw std::invalid_argument("SimConfig: x0 must be finite");
}

std::string describe_flags(std::uint32_t flags) {
  std::string out;
  auto add = [&out](const char* token) {
    if (!out.empty()) out += '|';
    out += token;
  };
  if (flags & kFlagClfViolation) add("clf_violation");
  if (flags & kFlagDomainViolation) add("domain_violation");
  if (flags & kFlagDiverged) add("diverged");
  if (flags & kFlagNonFinite) add("nonfinite");
  return out;
}

Vector rk4_step(const SystemModel& sys, const Controller& controller, const Vector& x, double h) {
  return rk4(sys, [&controller](const Vector& s) { return control_input(controller, s); }, x, h);
}

Vector rk4_step_held(const SystemModel& sys, const Vector& u, const Vector& x, double h) {
  return rk4(sys, [&u](const Vector&) -> const Vector& { return u; }, x, h);
}

Trajectory simulate(const SystemModel& sys, const Controller& controller, const SimConfig& cfg,
                    const Clf* clf) {
  validate(cfg, sys.state_dim());
  const bool with_clf = clf != nullptr && cfg.record_clf;

  Trajectory traj;
  traj.step = cfg.step;
  traj.input_dim = sys.input_dim();
  traj.times.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  traj.inputs.reserve(static_cast<std::size_t>(cfg.steps));
  traj.lambdas.reserve(static_cast<std::size_t>(cfg.steps));
  traj.flags.reserve(static_cast<std::size_t>(cfg.steps) + 1);

  auto record_state = [&](Vector x, double t) {
    std::uint32_t flags = kFlagNone;
    if (with_clf) {
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        v = clf_value(*clf, x);
      } catch (const DomainViolation&) {
        flags |= kFlagDomainViolation;
      }
      traj.clf_values.push_back(v);
    }
    traj.states.push_back(std::move(x));
    traj.times.push_back(t);
    traj.flags.push_back(flags);
  };

  record_state(cfg.x0, 0.0);
  for (int k = 0; k < cfg.steps; ++k) {
    const Vector& x = traj.states.back();
    std::uint32_t& flags = traj.flags.back();
    ControlSample sample;
    Vector next;
    try {
      sample = evaluate(controller, x);
      next = cfg.zero_order_hold ? rk4_step_held(sys, sample.u, x, cfg.step)
                                 : rk4_step(sys, controller, x, cfg.step);
    } catch (const DomainViolation&) {
      flags |= kFlagDomainViolation;
      traj.halted = true;
      break;
    } catch (const NonFiniteValue&) {
      flags |= kFlagNonFinite | kFlagDiverged;
      traj.halted = true;
      break;
    }
    if (sample.clf_violation) flags |= kFlagClfViolation;
    if (!next.allFinite()) {
      flags |= kFlagNonFinite | kFlagDiverged;
      traj.halted = true;
      break;
    }
    traj.inputs.push_back(std::move(sample.u));
    traj.lambdas.push_back(sample.lambda);
    record_state(std::move(next), static_cast<double>(k + 1) * cfg.step);
    if (inf_norm(traj.states.back()) > kDivergenceBound) {
      traj.flags.back() |= kFlagDiverged;
      traj.halted = true;
      break;
    }
  }
  traj.stabilized = !traj.halted && inf_norm(traj.states.back()) < kStabilizedBound;
  return traj;
}

double cost_index(const Trajectory& traj, const Matrix& q, const Matrix& r, double h) {
  if (traj.halted) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.inputs.size(); ++k) {
    const Vector& x = traj.states[k];
    const Vector& u = traj.inputs[k];
    sum += x.dot(q * x) + u.dot(r * u);
  }
  return 0.5 * h * sum;
}

DistortedCost distorted_cost(const Trajectory& traj, const Matrix& q, const Matrix& r, double h) {
  DistortedCost out;
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.inputs.size(); ++k) {
    double lambda = 1.0;
    if (k < traj.lambdas.size() && traj.lambdas[k]) {
      lambda = *traj.lambdas[k];
      if (!(lambda > 0.0)) {
        throw NonPositiveLambda(fmt::format("lambda = {} at sample {}", lambda, k));
      }
    } else {
      ++out.fallback_count;
    }
    const Vector& x = traj.states[k];
    const Vector& u = traj.inputs[k];
    sum += (x.dot(q * x) + u.dot(r * u)) / lambda;
  }
  out.value = traj.halted ? std::numeric_limits<double>::infinity() : 0.5 * h * sum;
  return out;
}

double lyap_decay_check(const Trajectory& traj, const Clf& clf, const SystemModel& sys,
                        const Matrix& q, const Matrix& r) {
  const std::size_t count = traj.states.size();
  if (count < 3) return 0.0;
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = clf_value(clf, traj.states[k]);

  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const Vector& x = traj.states[k];
    const ValueGradient vg = clf_value_grad(clf, x);
    const Matrix g = sys.input_matrix(x);
    const double a = vg.gradient.dot(sys.drift(x));
    const Vector b = g.transpose() * vg.gradient;
    double analytic = a;
    if (inf_norm(b) > b_zero_tolerance(vg.gradient, g)) {
      const double beta = b.dot(solve_linear(r, b));
      analytic = -std::hypot(a, std::sqrt(x.dot(q * x)) * std::sqrt(beta));
    }
    const double fd = (values[k + 1] - values[k - 1]) / (2.0 * traj.step);
    worst = std::max(worst, std::abs(fd - analytic) / (1.0 + std::abs(analytic)));
  }
  return worst;
}

CostReport cost_report(const Trajectory& traj, const Matrix& q, const Matrix& r) {
  CostReport report;
  report.j_quadratic = cost_index(traj, q, r, traj.step);
  bool any_lambda = false;
  for (const auto& l : traj.lambdas) any_lambda = any_lambda || l.has_value();
  if (any_lambda) {
    const DistortedCost d = distorted_cost(traj, q, r, traj.step);
    report.j_distorted = d.value;
    report.lambda_fallback_count = d.fallback_count;
  }
  report.stabilized = traj.stabilized;
  return report;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index m = traj.input_dim;
  std::string line = "t";
  for (Eigen::Index i = 0; i < n; ++i) line += fmt::format(",x{}", i + 1);
  for (Eigen::Index i = 0; i < m; ++i) line += fmt::format(",u{}", i + 1);
  line += ",V,lambda,flags\n";
  os << line;

  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    line.clear();
    append_number(line, traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      line += ',';
      append_number(line, traj.states[k](i));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      line += ',';
      if (k < traj.inputs.size()) append_number(line, traj.inputs[k](i));
    }
    line += ',';
    if (k < traj.clf_values.size()) append_number(line, traj.clf_values[k]);
    line += ',';
    if (k < traj.lambdas.size() && traj.lambdas[k]) append_number(line, *traj.lambdas[k]);
    line += ',';
    line += describe_flags(traj.flags[k]);
    line += '\n';
    os << line;
  }
}

}  // namespace sontag
