#include "ibkit/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ibkit::log {

namespace {

Level parse_level() noexcept {
  const char* raw = std::getenv("IBKIT_LOG");
  if (raw == nullptr) return Level::Warn;
  if (std::strcmp(raw, "error") == 0) return Level::Error;
  if (std::strcmp(raw, "warn") == 0) return Level::Warn;
  if (std::strcmp(raw, "info") == 0) return Level::Info;
  if (std::strcmp(raw, "debug") == 0) return Level::Debug;
  return Level::Warn;
}

const char* level_tag(Level level) noexcept {
  switch (level) {
    case Level::Error: return "error";
    case Level::Warn: return "warn";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() noexcept {
  static const Level cached = parse_level();
  return cached;
}

void write(Level level, const std::string& message) noexcept {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::fprintf(stderr, "[ibkit %s] %s\n", level_tag(level), message.c_str());
}

}  // namespace ibkit::log
