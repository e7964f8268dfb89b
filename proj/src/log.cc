#include "vcm/log.h"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace vcm::log {

namespace {
std::atomic<Level> g_level{Level::kWarning};
std::mutex g_mutex;

const char* Prefix(Level level) {
  switch (level) {
    case Level::kError: return "error";
    case Level::kWarning: return "warning";
    case Level::kInfo: return "info";
    case Level::kDebug: return "debug";
  }
  return "";
}
}  // namespace

void SetLevel(Level level) { g_level = level; }
Level GetLevel() { return g_level; }

void Write(Level level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  std::fprintf(stderr, "[%s] %.*s\n", Prefix(level),
               static_cast<int>(message.size()), message.data());
}

}  // namespace vcm::log
