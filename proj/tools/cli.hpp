#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skillhub::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Entry point of the `skillhub` tool. Output goes to `out`/`err` so tests can
/// capture it; `serve` blocks until the server stops.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace skillhub::cli
