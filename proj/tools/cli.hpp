#pragma once

#include "texharm/errors.hpp"
#include "texharm/mste.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace texharm::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

int exit_code(ErrorKind kind);

/// Runs one command line (args[0] is the program name). Regular output
/// goes to `out`, diagnostics to `err`; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "%.8e": nine significant digits.
std::string format_number(double v);

/// Header "d,<angle>,...", then one row per distance.
std::string grid_csv(const OffsetGrid& grid, std::span<const double> values);

}  // namespace texharm::cli
