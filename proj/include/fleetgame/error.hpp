#pragma once

#include <stdexcept>
#include <string>

namespace fleetgame {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input or a violated domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// The demand cannot be packed into the carrier's fleet.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fleetgame
