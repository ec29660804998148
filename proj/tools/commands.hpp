#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace csm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

/// Entry point for `csm <simulate|doa|triangulate|analyze> ...`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csm::cli
