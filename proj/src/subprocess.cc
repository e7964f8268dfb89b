#include "vcm/subprocess.h"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "vcm/error.h"

extern char** environ;

namespace vcm {

namespace fs = std::filesystem;

namespace {

std::string Tail(const fs::path& path, std::size_t max_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (s.size() > max_bytes) s = s.substr(s.size() - max_bytes);
  return s;
}

}  // namespace

CommandResult RunShellCommand(const std::string& command,
                              const fs::path& stdout_log,
                              const fs::path& stderr_log,
                              const std::vector<std::string>& env_passthrough) {
  for (const auto& p : {stdout_log, stderr_log}) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, stdout_log.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, stderr_log.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);

  std::vector<std::string> env_storage;
  std::vector<char*> envp;
  char** env = environ;
  if (!env_passthrough.empty()) {
    std::vector<std::string> names = env_passthrough;
    if (std::find(names.begin(), names.end(), "PATH") == names.end()) {
      names.push_back("PATH");
    }
    for (const auto& name : names) {
      if (const char* v = std::getenv(name.c_str())) {
        env_storage.push_back(name + "=" + v);
      }
    }
    for (auto& s : env_storage) envp.push_back(s.data());
    envp.push_back(nullptr);
    env = envp.data();
  }

  std::string shell = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = command;
  char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, env);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw CodecError(fmt::format("cannot spawn /bin/sh: error {}", rc));
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw CodecError("waitpid failed");
  }
  CommandResult result;
  result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
  result.stderr_tail = Tail(stderr_log, 2000);
  return result;
}

std::string ExpandTemplate(const std::string& tmpl,
                           const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        if (auto it = values.find(name); it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string ShellQuote(const std::string& value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

}  // namespace vcm
