#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ionspice::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kAnalysisError = 1;
inline constexpr int kUsageError = 2;

/// Runs one command line (args excludes the program name). `in` backs the
/// "-" netlist argument.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace ionspice::cli
