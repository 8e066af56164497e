#include "molte/log.hpp"

#include <iostream>
#include <mutex>
#include <set>
#include <string>

namespace molte {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

// Informational messages are dropped unless a caller installs its own sink.
void stderr_sink(LogLevel level, std::string_view message) {
  if (level == LogLevel::warning) std::cerr << "warning: " << message << '\n';
}

LogSink& current_sink() {
  static LogSink sink = stderr_sink;
  return sink;
}

void emit(LogLevel level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(level, message);
}

}  // namespace

LogSink set_log_sink(LogSink sink) {
  std::lock_guard lock(sink_mutex());
  LogSink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void log_info(std::string_view message) { emit(LogLevel::info, message); }
void log_warning(std::string_view message) { emit(LogLevel::warning, message); }

void log_once(LogLevel level, std::string_view message) {
  static std::mutex m;
  static std::set<std::string, std::less<>> seen;
  {
    std::lock_guard lock(m);
    if (!seen.insert(std::string(message)).second) return;
  }
  emit(level, message);
}

}  // namespace molte
