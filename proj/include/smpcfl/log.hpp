#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace smpcfl {

// Log level from SMPC_FEDSIM_LOG: debug | info | warn | error | off.
// Default is warn.
enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("SMPC_FEDSIM_LOG");
        if (!env) return LogLevel::Warn;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        if (std::strcmp(env, "info") == 0) return LogLevel::Info;
        if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
        if (std::strcmp(env, "error") == 0) return LogLevel::Error;
        if (std::strcmp(env, "off") == 0) return LogLevel::Off;
        return LogLevel::Warn;
    }();
    return level;
}

template <typename... Args>
void log_at(LogLevel lvl, const char* prefix, const char* fmt, Args... args) {
    if (lvl < log_level()) return;
    std::fprintf(stderr, "[%s] ", prefix);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

#define SMPCFL_LOG_DEBUG(...) ::smpcfl::log_at(::smpcfl::LogLevel::Debug, "debug", __VA_ARGS__)
#define SMPCFL_LOG_INFO(...) ::smpcfl::log_at(::smpcfl::LogLevel::Info, "info", __VA_ARGS__)
#define SMPCFL_LOG_WARN(...) ::smpcfl::log_at(::smpcfl::LogLevel::Warn, "warn", __VA_ARGS__)
#define SMPCFL_LOG_ERROR(...) ::smpcfl::log_at(::smpcfl::LogLevel::Error, "error", __VA_ARGS__)

} // namespace smpcfl
