#pragma once

#include <iosfwd>

namespace ssdsim {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,    // usage or configuration problem
  kExitWorkload = 2,  // unreadable trace or a request the device rejects
  kExitInternal = 3,  // simulator invariant violated
};

// Entry point shared by the ssdsim binary and the CLI tests.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace ssdsim
