#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deltasym::cli {

enum ExitCode : int {
  kOk = 0,
  kClaimFails = 1,
  kInputError = 2,
  kDegenerate = 3,
  kDiverged = 4,
};

// Runs the deltasym command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Catalog location: $DELTASYM_GOLDEN_DIR, else the source tree's golden/.
std::string golden_dir();

}  // namespace deltasym::cli
