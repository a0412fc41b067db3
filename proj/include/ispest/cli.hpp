#pragma once

#include <string>
#include <vector>

namespace ispest {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point of the `ispest` tool. Exit codes: 0 success, 1 failed
/// `--check`, 2 validation error or bad flag, 3 numerical failure.
int cli_main(int argc, char** argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace ispest
