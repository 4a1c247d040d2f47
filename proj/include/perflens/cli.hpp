#pragma once

// `perflens` command line: load, annotate, diff, analyze, bench.
// Exit codes: 0 ok, 1 error, 2 regression found by diff.

#include <iosfwd>
#include <string>
#include <vector>

namespace perflens::cli {

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace perflens::cli
