#pragma once

#include <stdexcept>
#include <string>

namespace csm {

/// Malformed or inconsistent configuration / input file content.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csm
