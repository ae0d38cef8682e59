#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sontag::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNotStabilizable = 3;

/// Entry point shared by the executable and the tests; args excludes the
/// program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sontag::cli
