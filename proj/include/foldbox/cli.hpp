#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace foldbox {

inline constexpr int exit_ok = 0;
inline constexpr int exit_user_error = 1;
inline constexpr int exit_internal = 2;

/// Runs the foldbox command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace foldbox
