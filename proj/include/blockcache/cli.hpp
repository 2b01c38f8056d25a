#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blockcache {

/// Exit codes: 0 success, 2 usage/config/input, 3 resource exhaustion.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitResource = 3;

/// Entry point behind the `blockcache` executable. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blockcache
