#ifndef VCM_LOG_H_
#define VCM_LOG_H_

#include <string_view>

#include <fmt/format.h>

namespace vcm::log {

enum class Level { kError = 0, kWarning = 1, kInfo = 2, kDebug = 3 };

void SetLevel(Level level);
Level GetLevel();

// Writes one line to stderr. Thread-safe.
void Write(Level level, std::string_view message);

template <typename... Args>
void Info(fmt::format_string<Args...> f, Args&&... args) {
  if (GetLevel() >= Level::kInfo) {
    Write(Level::kInfo, fmt::format(f, std::forward<Args>(args)...));
  }
}

template <typename... Args>
void Warn(fmt::format_string<Args...> f, Args&&... args) {
  if (GetLevel() >= Level::kWarning) {
    Write(Level::kWarning, fmt::format(f, std::forward<Args>(args)...));
  }
}

template <typename... Args>
void Error(fmt::format_string<Args...> f, Args&&... args) {
  Write(Level::kError, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void Debug(fmt::format_string<Args...> f, Args&&... args) {
  if (GetLevel() >= Level::kDebug) {
    Write(Level::kDebug, fmt::format(f, std::forward<Args>(args)...));
  }
}

}  // namespace vcm::log

#endif  // VCM_LOG_H_
