#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dwallet::cli {

enum ExitCode : int {
  kOk = 0,
  kPermanentFailure = 2,
  kTransientFailure = 3,
  kUsageError = 4,
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Runs one CLI invocation. args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                const EnvLookup& env);

/// Looks variables up in the process environment.
std::optional<std::string> process_env(const std::string& name);

}  // namespace dwallet::cli
