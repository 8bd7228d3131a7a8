#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affcode {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitInfeasible = 2;

// Runs one command; args exclude the program name.  Results go to `out`
// unless --out names a file, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version();

}  // namespace affcode
