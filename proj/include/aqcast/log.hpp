#pragma once

#include <functional>
#include <string>

namespace aqcast::log {

enum class Level { debug, info, warning };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the process-wide sink; returns the previous one. The default sink writes
// warnings to stderr and drops everything else.
Sink set_sink(Sink sink);
void set_verbose(bool verbose);

void write(Level level, const std::string& message);
inline void debug(const std::string& m) { write(Level::debug, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void warn(const std::string& m) { write(Level::warning, m); }

} // namespace aqcast::log
