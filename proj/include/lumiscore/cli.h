#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lumiscore {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;   ///< unreadable or malformed input
inline constexpr int kExitConfig = 2;  ///< bad config or command line

/// Entry point behind the lumiscore executable. `args` excludes the program
/// name. Artifacts go to the paths named by the flags; diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lumiscore
