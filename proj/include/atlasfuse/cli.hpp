#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace atlasfuse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns 0 on success, 1 on pipeline errors, 2 on bad
/// arguments.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atlasfuse::cli
