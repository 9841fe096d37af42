#pragma once

#include <iosfwd>

namespace wmbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `wmbench` tool. Usage errors return 2, runtime errors 1.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wmbench
