#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace brag::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitProvider = 3;

/// Runs one CLI invocation. args excludes the program name. Output streams
/// are injected so tests can capture them. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 provider error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace brag::cli
