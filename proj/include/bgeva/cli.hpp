#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bgeva {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitData = 2,
  kExitConvergence = 3,
  kExitConfig = 4,
};

// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Appends "--key value" for every config entry whose option was not given on
// the command line, so explicit flags always win. "true"/"false" values
// become bare flags or are skipped.
std::vector<std::string> merge_config(const std::vector<std::string>& args);

// Entry point behind the bgeva executable; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bgeva
