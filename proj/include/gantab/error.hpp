#pragma once

#include <stdexcept>
#include <string>

namespace gantab {

// Base for anything the toolkit raises on bad data or bad state.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or arguments; the CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace gantab
