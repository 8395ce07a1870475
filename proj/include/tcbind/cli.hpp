#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tcbind/errors.hpp"

namespace tcbind::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitSimulation = 4;

int exit_code(ErrorKind kind) noexcept;

/// Raw key=value pairs. Lines starting with '#' are comments, except in a
/// file that starts with "# tcbind" (an emitted output): then only the leading
/// comment block is read and its key=value lines are parameters, so an output
/// header can be fed back. Unknown keys throw InvalidParameter.
using ParamMap = std::map<std::string, std::string>;
ParamMap parse_params(std::istream& in);

/// "a:b:n" -> n log-spaced points from a to b inclusive.
std::vector<double> parse_eps_grid(const std::string& spec);

/// Comma-separated list of doubles.
std::vector<double> parse_list(const std::string& spec);

const char* version() noexcept;

/// Entry point of the command-line tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tcbind::cli
