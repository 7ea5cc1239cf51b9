#pragma once
// The `flame` command line, as a library so tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace flame::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Parses and executes one command. Results go to `out`; errors are written
/// to `err` as a single JSON object {code, message, details}. `in` feeds
/// interactive labeling.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace flame::cli
