#pragma once

#include <functional>
#include <string_view>

namespace safeopt {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the process-wide sink. Passing nullptr restores the stderr sink.
void set_log_sink(LogSink sink);
void set_log_level(LogLevel level);
void log(LogLevel level, std::string_view message);

inline void log_warning(std::string_view message) { log(LogLevel::kWarning, message); }
inline void log_info(std::string_view message) { log(LogLevel::kInfo, message); }

}  // namespace safeopt
