#pragma once

#include <stdexcept>
#include <string>

namespace specpath {

// Error taxonomy shared across the library. The CLI maps these onto process
// exit codes: usage/configuration -> 1, data -> 2, numerical -> 3.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation attempted on an object in the wrong lifecycle state
// (e.g. predicting with an unfitted model).
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace specpath
