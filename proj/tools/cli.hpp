#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace innodiff::cli {

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutDirEnv = "INNODIFF_OUT_DIR";

// Exit codes. Every failure also prints one line to stderr:
//   error: <code>: <message>
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // internal errors, table mismatches
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSchema = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitInvalid = 5;

/// Runs one command line. `args` excludes the program name. `out_dir_env`
/// is the value of kOutDirEnv, if set.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& out_dir_env);

}  // namespace innodiff::cli
