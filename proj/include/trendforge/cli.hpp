#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trendforge/error.hpp"

namespace trendforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitTraining = 4;

int exit_code(ErrorKind kind) noexcept;

/// Runs one command line (program name excluded), e.g. {"build", "--out", "run1"}.
/// Artifacts go to the configured output directory; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trendforge::cli
