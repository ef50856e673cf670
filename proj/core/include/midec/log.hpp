#pragma once

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

namespace midec::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Log level comes from the MIDEC_LOG environment variable
// (debug|info|warn|error); default is warn.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("MIDEC_LOG");
    if (!env) return Level::Warn;
    const std::string v(env);
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    if (v == "error") return Level::Error;
    return Level::Warn;
  }();
  return level;
}

inline void emit(Level level, const std::string& msg) {
  if (level < threshold()) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::cerr << "[midec:" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

inline void debug(const std::string& msg) { emit(Level::Debug, msg); }
inline void info(const std::string& msg) { emit(Level::Info, msg); }
inline void warn(const std::string& msg) { emit(Level::Warn, msg); }
inline void error(const std::string& msg) { emit(Level::Error, msg); }

}  // namespace midec::log
