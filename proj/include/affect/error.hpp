#pragma once

#include <stdexcept>
#include <string>

namespace affect {

// Configuration problems (bad flags, bad config JSON). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Input data problems (malformed manifest, unreadable files, bad values).
// CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace affect
