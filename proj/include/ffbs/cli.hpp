#pragma once

namespace ffbs {

// Full command-line front end (run / compare / verify). Returns the process
// exit code: 0 success, 1 verification failure, 2 invalid input, 3 numerical
// divergence.
int cli_main(int argc, const char* const* argv);

}  // namespace ffbs
