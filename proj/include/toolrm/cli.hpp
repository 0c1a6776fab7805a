#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toolrm {

/// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOperational = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line in-process. `args` excludes the program name.
/// Payload files are deterministic for fixed inputs and seeds; timestamps and
/// the effective configuration go to a separate metadata file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

}  // namespace toolrm
