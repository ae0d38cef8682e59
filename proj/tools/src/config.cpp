#include "config.hpp"

#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string_view>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace sontag::cli {
namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) throw ConfigError(what);
  throw ConfigError(fmt::format("line {}, column {}: {}", mark.line + 1, mark.column + 1, what));
}

void check_keys(const YAML::Node& node, std::string_view block,
                std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) fail_at(node, fmt::format("'{}' must be a mapping", block));
  for (const auto& item : node) {
    const std::string key = item.first.as<std::string>();
    bool known = false;
    for (const auto a : allowed) known = known || key == a;
    if (!known) fail_at(item.first, fmt::format("unknown key '{}' in '{}'", key, block));
  }
}

double read_double(const YAML::Node& node, std::string_view name) {
  if (!node.IsScalar()) fail_at(node, fmt::format("'{}' must be a number", name));
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail_at(node, fmt::format("'{}' must be a number", name));
  }
}

long long read_int(const YAML::Node& node, std::string_view name) {
  if (!node.IsScalar()) fail_at(node, fmt::format("'{}' must be an integer", name));
  try {
    return node.as<long long>();
  } catch (const YAML::Exception&) {
    fail_at(node, fmt::format("'{}' must be an integer", name));
  }
}

bool read_bool(const YAML::Node& node, std::string_view name) {
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    fail_at(node, fmt::format("'{}' must be true or false", name));
  }
}

Vector read_vector(const YAML::Node& node, std::string_view name) {
  if (!node.IsSequence() || node.size() == 0) {
    fail_at(node, fmt::format("'{}' must be a non-empty list of numbers", name));
  }
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = read_double(node[i], name);
  }
  return v;
}

Matrix read_matrix(const YAML::Node& node, std::string_view name) {
  if (!node.IsSequence() || node.size() == 0) {
    fail_at(node, fmt::format("'{}' must be a list of rows", name));
  }
  const std::size_t rows = node.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!node[i].IsSequence() || node[i].size() == 0) {
      fail_at(node[i], fmt::format("'{}' rows must be non-empty lists", name));
    }
    if (i == 0) cols = node[i].size();
    if (node[i].size() != cols) fail_at(node[i], fmt::format("'{}' rows differ in length", name));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          read_double(node[i][j], name);
    }
  }
  return m;
}

int positive_int(const YAML::Node& node, std::string_view name) {
  const long long v = read_int(node, name);
  if (v < 1 || v > 1'000'000'000) fail_at(node, fmt::format("'{}' must be >= 1", name));
  return static_cast<int>(v);
}

void parse_system(const YAML::Node& node, SystemConfig& system) {
  check_keys(node, "system",
             {"type", "mass", "gravity", "length", "inertia", "A", "B"});
  if (node["type"]) {
    const std::string type = node["type"].as<std::string>();
    if (type == "pendulum") {
      system.kind = SystemKind::kPendulum;
    } else if (type == "lti") {
      system.kind = SystemKind::kLti;
    } else {
      fail_at(node["type"], fmt::format("unknown system type '{}' (pendulum or lti)", type));
    }
  }
  if (system.kind == SystemKind::kPendulum) {
    for (const char* key : {"A", "B"}) {
      if (node[key]) fail_at(node[key], fmt::format("'{}' only applies to type lti", key));
    }
    if (node["mass"]) system.pendulum.mass = read_double(node["mass"], "mass");
    if (node["gravity"]) system.pendulum.gravity = read_double(node["gravity"], "gravity");
    if (node["length"]) system.pendulum.length = read_double(node["length"], "length");
    if (node["inertia"]) system.pendulum.inertia = read_double(node["inertia"], "inertia");
    try {
      validate(system.pendulum);
    } catch (const std::invalid_argument& e) {
      fail_at(node, e.what());
    }
  } else {
    for (const char* key : {"mass", "gravity", "length", "inertia"}) {
      if (node[key]) fail_at(node[key], fmt::format("'{}' only applies to type pendulum", key));
    }
    if (!node["A"] || !node["B"]) fail_at(node, "type lti requires A and B");
    system.a = read_matrix(node["A"], "A");
    system.b = read_matrix(node["B"], "B");
    if (system.a.rows() != system.a.cols()) fail_at(node["A"], "A must be square");
    if (system.b.rows() != system.a.rows()) fail_at(node["B"], "B must have as many rows as A");
  }
}

int state_dim(const SystemConfig& s) {
  return s.kind == SystemKind::kPendulum ? 2 : static_cast<int>(s.a.rows());
}
int input_dim(const SystemConfig& s) {
  return s.kind == SystemKind::kPendulum ? 1 : static_cast<int>(s.b.cols());
}

Vector angle_state(int n, double theta0_deg) {
  Vector x0 = Vector::Zero(n);
  x0(0) = theta0_deg * std::numbers::pi / 180.0;
  return x0;
}

GridSpec default_grid(int n) {
  if (n == 2) return GridSpec{Vector{{-1.4, -4.0}}, Vector{{1.4, 4.0}}, {101, 101}};
  return GridSpec{Vector::Constant(n, -1.0), Vector::Constant(n, 1.0),
                  std::vector<int>(static_cast<std::size_t>(n), 11)};
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string format_vector(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ", ";
    s += format_double(v(i));
  }
  return s + "]";
}

std::string format_matrix(const Matrix& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) s += ", ";
    s += format_vector(m.row(i).transpose());
  }
  return s + "]";
}

}  // namespace

Plant make_plant(const SystemConfig& system) {
  if (system.kind == SystemKind::kPendulum) return pendulum_system(system.pendulum);
  return lti_system(system.a, system.b);
}

RunConfig default_config() {
  RunConfig c;
  c.q = Matrix::Identity(2, 2);
  c.r = Matrix::Identity(1, 1);
  c.sim.x0 = angle_state(2, 25.0);
  c.sweep.sim = c.sim;
  c.roa.grid = default_grid(2);
  return c;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1,
                                  e.msg));
  }
  RunConfig c = default_config();
  if (root.IsNull()) return c;
  check_keys(root, "config", {"system", "weights", "sim", "sweep", "roa", "design", "seed"});

  if (root["system"]) parse_system(root["system"], c.system);
  const int n = state_dim(c.system);
  const int m = input_dim(c.system);

  c.q = Matrix::Identity(n, n);
  c.r = Matrix::Identity(m, m);
  if (const YAML::Node w = root["weights"]) {
    check_keys(w, "weights", {"Q", "R"});
    if (w["Q"]) c.q = read_matrix(w["Q"], "Q");
    if (w["R"]) c.r = read_matrix(w["R"], "R");
    if (c.q.rows() != n || c.q.cols() != n) {
      fail_at(w["Q"], fmt::format("Q must be {}x{}", n, n));
    }
    if (c.r.rows() != m || c.r.cols() != m) {
      fail_at(w["R"], fmt::format("R must be {}x{}", m, m));
    }
    if (!is_positive_definite(c.q)) fail_at(w["Q"] ? w["Q"] : w, "Q must be symmetric positive definite");
    if (!is_positive_definite(c.r)) fail_at(w["R"] ? w["R"] : w, "R must be symmetric positive definite");
  }

  c.sim.x0 = angle_state(n, 25.0);
  if (const YAML::Node s = root["sim"]) {
    check_keys(s, "sim", {"h", "N", "x0", "theta0_deg", "zoh"});
    if (s["h"]) {
      c.sim.step = read_double(s["h"], "h");
      if (!(c.sim.step > 0.0)) fail_at(s["h"], "'h' must be > 0");
    }
    if (s["N"]) c.sim.steps = positive_int(s["N"], "N");
    if (s["x0"] && s["theta0_deg"]) fail_at(s, "give either x0 or theta0_deg, not both");
    if (s["x0"]) {
      c.sim.x0 = read_vector(s["x0"], "x0");
      if (c.sim.x0.size() != n) fail_at(s["x0"], fmt::format("x0 must have {} entries", n));
    }
    if (s["theta0_deg"]) c.sim.x0 = angle_state(n, read_double(s["theta0_deg"], "theta0_deg"));
    if (s["zoh"]) c.sim.zero_order_hold = read_bool(s["zoh"], "zoh");
  }
  c.sweep.sim = c.sim;

  if (const YAML::Node s = root["sweep"]) {
    check_keys(s, "sweep", {"n_angles", "theta_min_deg", "theta_max_deg", "threads"});
    if (s["n_angles"]) c.sweep.n_angles = positive_int(s["n_angles"], "n_angles");
    if (s["theta_min_deg"]) c.sweep.theta_min_deg = read_double(s["theta_min_deg"], "theta_min_deg");
    if (s["theta_max_deg"]) c.sweep.theta_max_deg = read_double(s["theta_max_deg"], "theta_max_deg");
    if (s["threads"]) c.sweep.threads = positive_int(s["threads"], "threads");
    if (!(c.sweep.theta_min_deg <= c.sweep.theta_max_deg)) {
      fail_at(s, "theta_min_deg must not exceed theta_max_deg");
    }
  }

  c.roa.grid = default_grid(n);
  if (const YAML::Node s = root["roa"]) {
    check_keys(s, "roa", {"lower", "upper", "points", "C", "threads"});
    if (s["lower"]) c.roa.grid.lower = read_vector(s["lower"], "lower");
    if (s["upper"]) c.roa.grid.upper = read_vector(s["upper"], "upper");
    if (s["points"]) {
      if (!s["points"].IsSequence()) fail_at(s["points"], "'points' must be a list of integers");
      c.roa.grid.points_per_axis.clear();
      for (const auto& p : s["points"]) c.roa.grid.points_per_axis.push_back(positive_int(p, "points"));
    }
    if (s["C"]) {
      if (s["C"].IsScalar() && s["C"].as<std::string>() == "auto") {
        c.roa.level.reset();
      } else {
        c.roa.level = read_double(s["C"], "C");
        if (!(*c.roa.level >= 0.0)) fail_at(s["C"], "'C' must be >= 0 or auto");
      }
    }
    if (s["threads"]) c.roa.threads = positive_int(s["threads"], "threads");
    if (c.roa.grid.lower.size() != n || c.roa.grid.upper.size() != n ||
        static_cast<int>(c.roa.grid.points_per_axis.size()) != n) {
      fail_at(s, fmt::format("roa grid must have {} axes", n));
    }
    try {
      validate(c.roa.grid);
    } catch (const std::invalid_argument& e) {
      fail_at(s, e.what());
    }
  }

  if (const YAML::Node d = root["design"]) {
    const auto design = parse_design(d.as<std::string>());
    if (!design) fail_at(d, "design must be one of i, ii, iii, iv");
    c.design = *design;
  }
  if (root["seed"]) c.seed = read_int(root["seed"], "seed");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

std::string emit_config(const RunConfig& c) {
  std::string out;
  auto line = [&out](std::string_view text) {
    out += text;
    out += '\n';
  };
  line("system:");
  if (c.system.kind == SystemKind::kPendulum) {
    line("  type: pendulum");
    line("  mass: " + format_double(c.system.pendulum.mass));
    line("  gravity: " + format_double(c.system.pendulum.gravity));
    line("  length: " + format_double(c.system.pendulum.length));
    line("  inertia: " + format_double(c.system.pendulum.inertia));
  } else {
    line("  type: lti");
    line("  A: " + format_matrix(c.system.a));
    line("  B: " + format_matrix(c.system.b));
  }
  line("weights:");
  line("  Q: " + format_matrix(c.q));
  line("  R: " + format_matrix(c.r));
  line("sim:");
  line("  h: " + format_double(c.sim.step));
  line(fmt::format("  N: {}", c.sim.steps));
  line("  x0: " + format_vector(c.sim.x0));
  line(fmt::format("  zoh: {}", c.sim.zero_order_hold));
  line("sweep:");
  line(fmt::format("  n_angles: {}", c.sweep.n_angles));
  line("  theta_min_deg: " + format_double(c.sweep.theta_min_deg));
  line("  theta_max_deg: " + format_double(c.sweep.theta_max_deg));
  line(fmt::format("  threads: {}", c.sweep.threads));
  line("roa:");
  line("  lower: " + format_vector(c.roa.grid.lower));
  line("  upper: " + format_vector(c.roa.grid.upper));
  line(fmt::format("  points: [{}]", fmt::join(c.roa.grid.points_per_axis, ", ")));
  line("  C: " + (c.roa.level ? format_double(*c.roa.level) : std::string("auto")));
  line(fmt::format("  threads: {}", c.roa.threads));
  line(fmt::format("design: {}", design_label(c.design)));
  line(fmt::format("seed: {}", c.seed));
  return out;
}

void set_initial_angle(RunConfig& config, double theta0_deg) {
  config.sim.x0 = angle_state(static_cast<int>(config.sim.x0.size()), theta0_deg);
  config.sweep.sim.x0 = config.sim.x0;
}

}  // namespace sontag::cli
