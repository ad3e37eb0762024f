#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace djd::cli {

enum class Exit : int {
  Ok = 0,
  Negative = 1,  // detect --strict-exit with a "single" verdict
  Usage = 2,
  Input = 3,
  Internal = 4,
};

/// Runs one invocation; `args` excludes the program name. Machine output goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace djd::cli
