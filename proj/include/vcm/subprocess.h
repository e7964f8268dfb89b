#ifndef VCM_SUBPROCESS_H_
#define VCM_SUBPROCESS_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vcm {

struct CommandResult {
  int exit_status = 0;
  std::string stderr_tail;
};

// Runs `command` through /bin/sh -c with stdout and stderr redirected to the
// given log files. When `env_passthrough` is non-empty the child only sees
// those variables (PATH is always kept).
CommandResult RunShellCommand(const std::string& command,
                              const std::filesystem::path& stdout_log,
                              const std::filesystem::path& stderr_log,
                              const std::vector<std::string>& env_passthrough);

// Replaces every {name} in `tmpl` with the matching value. Values are
// inserted verbatim; callers quote paths with ShellQuote.
std::string ExpandTemplate(const std::string& tmpl,
                           const std::map<std::string, std::string>& values);

std::string ShellQuote(const std::string& value);

}  // namespace vcm

#endif  // VCM_SUBPROCESS_H_
