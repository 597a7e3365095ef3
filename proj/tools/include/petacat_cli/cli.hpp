#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace petacat::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

/// Runs one invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Splits a command line with single/double quote grouping.
std::vector<std::string> split_command_line(const std::string& line);

/// Every subcommand name, in help order.
const std::vector<std::string>& subcommand_names();

}  // namespace petacat::cli
