#pragma once

#include <string>
#include <vector>

namespace quenchlab {

// Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 resource limit.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitResource = 4;

int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace quenchlab
