#include "aqcast/log.hpp"

#include <iostream>
#include <mutex>

namespace aqcast::log {

namespace {

std::mutex g_mutex;
bool g_verbose = false;

void default_sink(Level level, const std::string& message) {
  if (level == Level::warning) {
    std::cerr << "warning: " << message << '\n';
  } else if (g_verbose) {
    std::cerr << message << '\n';
  }
}

Sink g_sink = default_sink;

} // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  Sink previous = std::move(g_sink);
  g_sink = sink ? std::move(sink) : Sink(default_sink);
  return previous;
}

void set_verbose(bool verbose) {
  std::lock_guard lock(g_mutex);
  g_verbose = verbose;
}

void write(Level level, const std::string& message) {
  std::lock_guard lock(g_mutex);
  g_sink(level, message);
}

} // namespace aqcast::log
