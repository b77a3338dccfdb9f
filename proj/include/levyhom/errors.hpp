#pragma once

#include <stdexcept>
#include <string>

namespace levyhom {

// Error categories map one-to-one onto CLI exit codes:
// ConfigError -> 2, NumericError -> 3, IoError -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed configuration: bad keys, bad types, out-of-domain parameters.
struct ConfigError : Error {
  using Error::Error;
};

// Mathematical failures: invalid model data, non-convergence, divergent
// quadrature requests.
struct NumericError : Error {
  using Error::Error;
};

// Missing or unreadable/unwritable files.
struct IoError : Error {
  using Error::Error;
};

}  // namespace levyhom
