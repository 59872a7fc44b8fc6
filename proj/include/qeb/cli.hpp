#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qeb::cli {

inline constexpr const char* kToolName = "qebars";
inline constexpr const char* kVersion = "1.0.0";

/// Environment variable holding the default number of worker threads.
inline constexpr const char* kThreadsEnv = "QEB_NUM_THREADS";

/// Runs one command line (without the program name). Results go to `out`; failures are
/// reported on `err` as {"error": {"type", "message", ...}} with a nonzero return value.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qeb::cli
