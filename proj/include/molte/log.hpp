#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace molte {

enum class LogLevel { info, warning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replace the process-wide sink; returns the previous one. The default sink
/// writes warnings to standard error and drops informational messages. Safe to call from any thread.
LogSink set_log_sink(LogSink sink);

void log_info(std::string_view message);
void log_warning(std::string_view message);
/// Emits each distinct message at most once per process.
void log_once(LogLevel level, std::string_view message);

}  // namespace molte
