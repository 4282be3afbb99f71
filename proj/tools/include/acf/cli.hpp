#pragma once

#include <iosfwd>

namespace acf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `acf` tool. Failures print one line to `err`:
///   acf: error: <kind>: <message>
/// where <kind> is "usage" (exit 2) or an error kind such as "data_error"
/// or "malformed_input" (exit 1).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace acf::cli
