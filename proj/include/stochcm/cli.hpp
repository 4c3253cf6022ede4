#pragma once

// Batch front-end.
//
//   stochcm <gap|simulate|manifold|reduce|attract|residual>
//           --config <path> [--seed <u64>] [--out <dir>] [--threads <n>]
//
// Exit codes: 0 success (for `gap`: condition satisfied), 1 validation error
// or unsatisfied gap condition, 2 numerical failure.

#include <iosfwd>

namespace stochcm {

int run_cli(int argc, char** argv);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace stochcm
