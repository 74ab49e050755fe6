#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace slicevol {

// Diagnostic verbosity comes from the SLICEVOL_LOG environment variable:
// "debug" enables everything, "info" the default notices, anything else is silent.
enum class LogLevel { silent = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SLICEVOL_LOG");
    if (env == nullptr) return LogLevel::silent;
    std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::silent;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::fprintf(stderr, "[slicevol] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::fprintf(stderr, "[slicevol:debug] %s\n", msg.c_str());
}

}  // namespace slicevol
