#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace orchestra::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDomainError = 1;
inline constexpr int kUsageError = 2;

// Runs one command line (without the program name). Normal output goes to
// `out`; help, usage errors and machine-readable domain errors go to `err`.
int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace orchestra::cli
