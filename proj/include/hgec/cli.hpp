#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hgec::cli {

enum ExitStatus : int {
  kOk = 0,
  kFailure = 1,  ///< operational failure (I/O, engine, empty batch, ...)
  kUsage = 2,    ///< unknown subcommand, bad or missing flag
};

/// Runs one invocation. Reports and data go to `out`, logs and usage errors
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hgec::cli
