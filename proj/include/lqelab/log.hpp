#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace lqelab {

// Verbosity is controlled by the LQE_LAB_LOG environment variable:
// error, warn (default), info, debug.
enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("LQE_LAB_LOG");
    if (!env) return LogLevel::Warn;
    std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "warn") return LogLevel::Warn;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

template <typename... Args>
inline void log_at(LogLevel level, const char* tag, const char* fmt,
                   Args... args) {
  if (level > log_level()) return;
  std::fprintf(stderr, "[%s] ", tag);
  if constexpr (sizeof...(Args) == 0)
    std::fputs(fmt, stderr);
  else
    std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

#define LQELAB_LOG_ERROR(...) ::lqelab::log_at(::lqelab::LogLevel::Error, "error", __VA_ARGS__)
#define LQELAB_LOG_WARN(...) ::lqelab::log_at(::lqelab::LogLevel::Warn, "warn", __VA_ARGS__)
#define LQELAB_LOG_INFO(...) ::lqelab::log_at(::lqelab::LogLevel::Info, "info", __VA_ARGS__)
#define LQELAB_LOG_DEBUG(...) ::lqelab::log_at(::lqelab::LogLevel::Debug, "debug", __VA_ARGS__)

}  // namespace lqelab
