#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "config.hpp"
#include "sontag/errors.hpp"

namespace sontag::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string command;
  std::string config_path;
  std::optional<std::string> design;
  std::optional<double> theta0_deg;
  std::string out_dir = "out";
  std::optional<std::int64_t> seed;
  bool zoh = false;
};

std::string format_row(const Matrix& m, Eigen::Index i) {
  std::string s = "[";
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j > 0) s += ", ";
    s += fmt::format("{:.17g}", m(i, j));
  }
  return s + "]";
}

std::string format_matrix(const Matrix& m) {
  if (m.rows() == 1) return format_row(m, 0);
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) s += ", ";
    s += format_row(m, i);
  }
  return s + "]";
}

std::string format_optional(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : std::string("n/a");
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return os;
}

void write_effective_config(const RunConfig& config, const fs::path& dir) {
  auto os = open_output(dir / "effective_config.yaml");
  os << emit_config(config);
}

int cmd_synthesize(const RunConfig& config, const DesignSet& d, const Plant& plant,
                   std::ostream& out) {
  const double residual =
      inf_norm(care_residual(d.lqr.a, d.lqr.b, d.lqr.q, d.lqr.r, d.lqr.p)) / inf_norm(d.lqr.q);
  fmt::print(out, "system: {}\n", plant.name);
  fmt::print(out, "A = {}\n", format_matrix(d.linearization.a));
  fmt::print(out, "B = {}\n", format_matrix(d.linearization.b));
  fmt::print(out, "Q = {}\n", format_matrix(config.q));
  fmt::print(out, "R = {}\n", format_matrix(config.r));
  fmt::print(out, "P = {}\n", format_matrix(d.lqr.p));
  fmt::print(out, "K = {}\n", format_matrix(d.lqr.k));
  fmt::print(out, "are_residual = {:.3e}\n", residual);
  fmt::print(out, "closed_loop_hurwitz = {}\n", is_hurwitz(d.lqr.a - d.lqr.b * d.lqr.k));
  fmt::print(out, "P_tilde = {}\n", format_matrix(d.global_clf.p_tilde()));
  fmt::print(out, "K_fbl = {}\n", format_matrix(d.fbl.k_fbl));
  fmt::print(out, "fbl_domain = {}\n", plant.fbl.domain_description);
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, const DesignSet& d, const Plant& plant,
                 const fs::path& dir, std::ostream& out) {
  const Clf clf = d.clf(config.design);
  const Trajectory traj = simulate(plant.system, d.controller(config.design), config.sim, &clf);
  {
    auto os = open_output(dir / "trajectory.csv");
    write_trajectory_csv(os, traj);
  }
  const CostReport report = cost_report(traj, config.q, config.r);
  const bool sontag = config.design == Design::kSontagLocal ||
                      config.design == Design::kSontagGlobal;
  std::optional<double> mismatch;
  if (sontag && !traj.halted) {
    mismatch = lyap_decay_check(traj, clf, plant.system, config.q, config.r);
  }
  fmt::print(out, "design: {}\n", design_label(config.design));
  fmt::print(out, "x0 = {}\n", format_matrix(config.sim.x0.transpose()));
  fmt::print(out, "J_quadratic = {:.17g}\n", report.j_quadratic);
  fmt::print(out, "J_distorted = {}\n", format_optional(report.j_distorted));
  fmt::print(out, "lambda_fallback_count = {}\n", report.lambda_fallback_count);
  fmt::print(out, "stabilized = {}\n", report.stabilized);
  fmt::print(out, "halted = {}\n", traj.halted);
  if (traj.halted) fmt::print(out, "halt_reason = {}\n", describe_flags(traj.flags.back()));
  fmt::print(out, "max_decay_mismatch = {}\n", format_optional(mismatch));
  fmt::print(out, "trajectory_csv = {}\n", (dir / "trajectory.csv").string());
  return kExitOk;
}

// Contiguous runs of rows where pred holds, as "a..b" in degrees.
template <typename Pred>
std::string angle_ranges(const SweepResult& result, Pred pred) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < result.rows.size()) {
    if (!pred(result.rows[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < result.rows.size() && pred(result.rows[j + 1])) ++j;
    parts.push_back(
        fmt::format("{:.4f}..{:.4f}", result.rows[i].theta0_deg, result.rows[j].theta0_deg));
    i = j + 1;
  }
  return parts.empty() ? std::string("none") : fmt::format("{}", fmt::join(parts, ", "));
}

void print_ratio_span(std::ostream& out, const SweepResult& result, const char* name,
                      std::optional<double> SweepRow::*field) {
  std::optional<double> lo;
  std::optional<double> hi;
  for (const SweepRow& row : result.rows) {
    if (!(row.*field)) continue;
    const double v = *(row.*field);
    lo = lo ? std::min(*lo, v) : v;
    hi = hi ? std::max(*hi, v) : v;
  }
  fmt::print(out, "{}_min = {}\n{}_max = {}\n", name, format_optional(lo), name,
             format_optional(hi));
}

int cmd_sweep(const RunConfig& config, const DesignSet& d, const Plant& plant,
              const fs::path& dir, std::ostream& out) {
  const Design sontag_design =
      config.design == Design::kSontagGlobal ? Design::kSontagGlobal : Design::kSontagLocal;
  const SweepResult result = sweep_initial_angles(
      plant.system, d.controller(sontag_design), d.controller(Design::kLqr),
      d.controller(Design::kFeedbackLinearizing), config.q, config.r, config.sweep);
  {
    auto os = open_output(dir / "sweep.csv");
    write_sweep_csv(os, result);
  }
  fmt::print(out, "rows = {}\n", result.rows.size());
  fmt::print(out, "stabilized_sontag_deg = {}\n",
             angle_ranges(result, [](const SweepRow& r) { return r.stab_sontag; }));
  fmt::print(out, "stabilized_lqr_deg = {}\n",
             angle_ranges(result, [](const SweepRow& r) { return r.stab_lqr; }));
  fmt::print(out, "stabilized_fbl_deg = {}\n",
             angle_ranges(result, [](const SweepRow& r) { return r.stab_fbl; }));
  const auto split = std::find_if(result.rows.begin(), result.rows.end(), [](const SweepRow& r) {
    return r.stab_sontag && !r.stab_lqr;
  });
  fmt::print(out, "first_lqr_failure_sontag_stable_deg = {}\n",
             split == result.rows.end() ? std::string("none")
                                        : fmt::format("{:.17g}", split->theta0_deg));
  print_ratio_span(out, result, "ratio_lqr", &SweepRow::ratio_lqr);
  print_ratio_span(out, result, "ratio_fbl", &SweepRow::ratio_fbl);
  fmt::print(out, "sweep_csv = {}\n", (dir / "sweep.csv").string());
  return kExitOk;
}

int cmd_roa(const RunConfig& config, const DesignSet& d, const Plant& plant, const fs::path& dir,
            std::ostream& out) {
  const Clf clf = d.clf(Design::kSontagLocal);
  const Controller lqr = d.controller(Design::kLqr);
  const Controller sontag = d.controller(Design::kSontagLocal);
  const double c_lqr =
      largest_certified_sublevel(plant.system, clf, lqr, config.roa.grid, config.roa.threads);
  const double c_sontag =
      largest_certified_sublevel(plant.system, clf, sontag, config.roa.grid, config.roa.threads);
  const double level = config.roa.level ? *config.roa.level : std::max(c_lqr, c_sontag);
  const RoaCertificate cert =
      roa_certify(plant.system, clf, lqr, sontag, config.roa.grid, level, config.roa.threads);
  {
    auto os = open_output(dir / "roa.csv");
    write_roa_csv(os, cert);
  }
  fmt::print(out, "C_lqr = {:.17g}\n", c_lqr);
  fmt::print(out, "C_sontag = {:.17g}\n", c_sontag);
  fmt::print(out, "C = {:.17g}{}\n", level, config.roa.level ? "" : " (auto)");
  fmt::print(out, "grid_points = {}\n", config.roa.grid.size());
  fmt::print(out, "members_lqr = {}\n", cert.members_lqr.size());
  fmt::print(out, "members_sontag = {}\n", cert.members_sontag.size());
  fmt::print(out, "subset_holds = {}\n", cert.subset_holds);
  fmt::print(out, "roa_csv = {}\n", (dir / "roa.csv").string());
  return kExitOk;
}

int dispatch(const Options& opts, std::ostream& out) {
  RunConfig config = opts.config_path.empty() ? default_config() : load_config(opts.config_path);
  if (opts.design) {
    const auto design = parse_design(*opts.design);
    if (!design) throw ConfigError("--design must be one of i, ii, iii, iv");
    config.design = *design;
  }
  if (opts.theta0_deg) set_initial_angle(config, *opts.theta0_deg);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.zoh) {
    config.sim.zero_order_hold = true;
    config.sweep.sim.zero_order_hold = true;
  }

  Plant plant = [&] {
    try {
      return make_plant(config.system);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  DesignSet designs = [&] {
    try {
      return synthesize_designs(plant, config.q, config.r);
    } catch (const BadWeights& e) {
      throw ConfigError(e.what());
    }
  }();

  const fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory '{}'", dir.string()));
  write_effective_config(config, dir);

  if (opts.command == "synthesize") return cmd_synthesize(config, designs, plant, out);
  if (opts.command == "simulate") return cmd_simulate(config, designs, plant, dir, out);
  if (opts.command == "sweep") return cmd_sweep(config, designs, plant, dir, out);
  return cmd_roa(config, designs, plant, dir, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opts;
  CLI::App app{"Locally optimal Sontag-type controllers: synthesis, simulation, sweeps, ROA",
               "sontag"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--config", opts.config_path, "YAML run configuration");
  app.add_option("--design", opts.design, "Design selector: i, ii, iii or iv");
  app.add_option("--theta0-deg", opts.theta0_deg, "Initial angle in degrees (x0 = (theta0, 0))");
  app.add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", opts.seed, "Seed recorded in the effective config");
  app.add_flag("--zoh", opts.zoh, "Hold the input constant over each integration step");
  for (const char* name : {"synthesize", "simulate", "sweep", "roa"}) {
    app.add_subcommand(name)->callback([&opts, name] { opts.command = name; });
  }
  app.get_subcommand("synthesize")->description("Linearize, solve the Riccati equation, build all designs");
  app.get_subcommand("simulate")->description("Closed-loop run of one design, writes trajectory.csv");
  app.get_subcommand("sweep")->description("Initial-angle sweep over designs i, iii, iv, writes sweep.csv");
  app.get_subcommand("roa")->description("Grid region-of-attraction certificates, writes roa.csv");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    return dispatch(opts, out);
  } catch (const NotStabilizable& e) {
    err << "not stabilizable: " << e.what() << '\n';
    return kExitNotStabilizable;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace sontag::cli
