#pragma once

// Minimal stderr logging controlled by the RAPS_LOG environment variable:
// "quiet", "info" (default) or "debug".

#include <cstdlib>
#include <iostream>
#include <string>

namespace raps {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("RAPS_LOG");
        if (!env) return LogLevel::info;
        const std::string v(env);
        if (v == "quiet") return LogLevel::quiet;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::info;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "[raps] " << msg << '\n';
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::cerr << "[raps:debug] " << msg << '\n';
}

} // namespace raps
