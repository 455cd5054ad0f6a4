#pragma once

#include <stdexcept>
#include <string>

namespace cogadapt {

// Configuration / usage problems: bad field values, missing files the user
// named, schema violations. Mapped to a distinct process exit code.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Everything that goes wrong after configuration was accepted: dimension
// mismatches, numeric blowups, corrupt files, failed invariants.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public RuntimeError {
 public:
  explicit DimensionError(const std::string& msg) : RuntimeError(msg) {}
};

class IoError : public RuntimeError {
 public:
  explicit IoError(const std::string& msg) : RuntimeError(msg) {}
};

}  // namespace cogadapt
