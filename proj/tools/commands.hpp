#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gblend::cli {

/// Runs one CLI invocation; args excludes the program name. Returns the
/// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "1/8", "0.125", "8" -> positive factor. Throws std::invalid_argument.
double parse_scale(const std::string& text);

}  // namespace gblend::cli
