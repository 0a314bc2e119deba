#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrgibbs::cli {

/// Exit codes.
enum Exit : int { ok = 0, assertion = 1, usage = 2, capacity = 3 };

/// Entry point shared by the executable and the tests. args[0] is the program name.
/// Errors go to `err` as one line of JSON.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace lrgibbs::cli
