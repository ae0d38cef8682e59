#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "sontag/analysis.hpp"
#include "sontag/designs.hpp"
#include "sontag/model.hpp"
#include "sontag/sim.hpp"

namespace sontag::cli {

/// Invalid or unreadable configuration; the message carries line:column
/// when the problem is tied to a position in the file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SystemKind { kPendulum, kLti };

struct SystemConfig {
  SystemKind kind = SystemKind::kPendulum;
  PendulumParams pendulum;
  Matrix a;  // lti only
  Matrix b;
};

struct RoaConfig {
  GridSpec grid;
  std::optional<double> level;  // empty: largest certified sublevel of the Sontag law
  int threads = 1;
};

struct RunConfig {
  SystemConfig system;
  Matrix q;
  Matrix r;
  SimConfig sim;
  SweepConfig sweep;
  RoaConfig roa;
  Design design = Design::kSontagLocal;
  std::int64_t seed = 0;
};

Plant make_plant(const SystemConfig& system);

/// Defaults for every block: pendulum (1, 9.81, 1, 0), Q = I, R = I,
/// h = 0.01, N = 1500, x0 = (25 deg, 0), 1000 angles over [0, 89] deg.
RunConfig default_config();

/// Parses YAML text on top of the defaults. Unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every resolved value, doubles with 17 significant digits, so that
/// parse_config(emit_config(c)) reproduces c exactly.
std::string emit_config(const RunConfig& config);

/// Replaces x0 with (theta0, 0, ..., 0), theta0 given in degrees.
void set_initial_angle(RunConfig& config, double theta0_deg);

}  // namespace sontag::cli
