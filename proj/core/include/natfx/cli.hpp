#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace natfx::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 2 when a formula or component is rejected as not identifiable,
/// 1 for any other error (message written to `err`).
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace natfx::cli
