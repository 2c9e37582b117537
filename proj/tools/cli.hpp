#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stmmmf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Name of the environment variable that supplies the default output directory.
inline constexpr const char* kOutDirEnv = "STMMMF_OUT_DIR";

/// Search axes swept by `gridsearch` when no override is given.
std::vector<double> default_lambda_grid();      // 10^(i/16), i = 1, 5, ..., 37
std::vector<double> default_tau1_grid();        // percent of the threshold gap
std::vector<double> default_sample_grid();      // percent of the candidates

/// Runs one `stmmmf` invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stmmmf::cli
