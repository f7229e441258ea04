#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hkcg {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPrecondition = 1;  // invalid parameters, I/O or format errors
inline constexpr int kExitUsage = 2;         // unknown flag or subcommand
inline constexpr int kExitCheckFailed = 3;   // verify: at least one report did not pass

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace hkcg
