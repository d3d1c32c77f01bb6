// include/forager/cli.hpp
//
// Subcommands gen, run, eval and compare. Exit codes: 0 success, 1 runtime
// failure, 2 usage or validation error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace forager {

inline constexpr const char* kToolVersion = "0.1.0";
/// Default output directory when -o is omitted.
inline constexpr const char* kOutDirEnv = "FORAGER_OUT_DIR";

/// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace forager
