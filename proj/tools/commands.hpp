#pragma once

namespace lmfrail::cli {

// Full command line: `lmfrail <fit|simulate|diagnose|region> ...`.
// Exit codes: 0 success/convergence, 1 input error, 2 statistical
// non-convergence or estimation failure.
int run_cli(int argc, const char* const* argv);

}  // namespace lmfrail::cli
