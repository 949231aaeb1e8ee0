#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iashock::cli {

// exit codes
constexpr int ok            = 0;
constexpr int solver_failed = 1;
constexpr int usage_error   = 2;

// args excludes the program name
int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int dispatch(int argc, char **argv);

} // namespace iashock::cli
