#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pwltc::cli {

/// Runs one command. Returns 0 on success, 1 on a failed check or a numeric
/// failure, 2 on a usage or parameter-domain error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace pwltc::cli
