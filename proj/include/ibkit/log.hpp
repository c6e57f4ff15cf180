#pragma once

#include <string>

namespace ibkit::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Resolved once from IBKIT_LOG (error|warn|info|debug); defaults to warn.
Level threshold() noexcept;

// Writes to stderr only; data outputs are never touched by the logger.
void write(Level level, const std::string& message) noexcept;

inline void error(const std::string& m) noexcept { write(Level::Error, m); }
inline void warn(const std::string& m) noexcept { write(Level::Warn, m); }
inline void info(const std::string& m) noexcept { write(Level::Info, m); }
inline void debug(const std::string& m) noexcept { write(Level::Debug, m); }

}  // namespace ibkit::log
