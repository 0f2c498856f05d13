#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace snl::cli
{

/// Process exit codes.
enum ExitCode : int
{
  kSuccess = 0,
  kUsage = 1,
  kCertifiedFalse = 2,
  kIndeterminate = 3,
};

/// Runs one command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace snl::cli
