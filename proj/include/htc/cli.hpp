#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace htc::cli {

/// Runs the command line `args` (without the program name) in process and
/// returns the exit status: 0 ok, 2 config, 3 forward, 4 consistency,
/// 5 degeneracy, 6 non-contraction.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace htc::cli
