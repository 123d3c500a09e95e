#pragma once

#include <stdexcept>
#include <string>

namespace nestedeg {

// Base of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value supplied by the caller lies outside the accepted domain
// (observation outside [0,1], malformed CSV row, non-ergodic chain, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// The caller broke the call protocol (update without predict, stale leaf).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Request is well formed but not supported by this build (e.g. a d > 1
// Lipschitz oracle or L* of an AR(1) process).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// File system or parse failure on an external artifact.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nestedeg
