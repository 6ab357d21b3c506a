#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flexilab {

// Command-line entry point. Exit codes: 0 success, 1 verdict mismatch,
// 2 usage or runtime error (diagnostics on `err`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flexilab
