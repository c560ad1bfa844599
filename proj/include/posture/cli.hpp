#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace posture::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;
inline constexpr int kNumericFailure = 3;

// Environment variable consulted for the default --seed.
inline constexpr const char* kSeedEnv = "POSTURE_SEED";

// `args` excludes the program name. Results go to `out` (or to --out files),
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace posture::cli
