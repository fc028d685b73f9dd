#pragma once

#include <stdexcept>
#include <string>

namespace dcn {

// Shape or rank of a tensor does not match what an operation requires.
struct shape_error : std::runtime_error {
  explicit shape_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Scalar argument outside its valid range (dropout rate, k, label index, ...).
struct parameter_error : std::runtime_error {
  explicit parameter_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent run/network configuration (unsupported depth/resolution pair,
// unknown head, empty dataset where one is required, ...).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or truncated file (checkpoint, manifest, image).
struct format_error : std::runtime_error {
  explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Source checkpoint cannot be transplanted into the target architecture.
struct incompatibility_error : std::runtime_error {
  explicit incompatibility_error(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace dcn
