#pragma once

#include <stdexcept>
#include <string>

namespace prodrange {

/// Malformed or inconsistent caller input (bad ids, mismatched factors, parse errors).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid structural configuration, e.g. an empty factor list.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace prodrange
