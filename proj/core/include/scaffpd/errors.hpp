#pragma once

#include <stdexcept>
#include <string>

namespace scaffpd {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scaffpd
