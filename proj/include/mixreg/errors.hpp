#pragma once

#include <stdexcept>
#include <string>

namespace mixreg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// dV < 0 passed to an accumulator.
struct NegativeVarianceIncrement : Error {
  using Error::Error;
};

// S moved away from 0 while total V is still 0.  While no variance has been
// paid in there is no bet, so the score must stay at zero.
struct BrokenZeroConvention : Error {
  using Error::Error;
};

// Density queried exactly at eta = 0 (the integrable singularity).
struct UndefinedAtZero : Error {
  using Error::Error;
};

struct OutOfRange : Error {
  using Error::Error;
};

struct InvalidRho : Error {
  using Error::Error;
};

// Conditional bound requested at or below its variance threshold.
struct BelowThreshold : Error {
  using Error::Error;
};

// Boundary-regime bound requested in the interior regime (or vice versa).
struct WrongRegime : Error {
  using Error::Error;
};

struct NegativeRadicand : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct UnknownGenerator : Error {
  using Error::Error;
};

// Malformed replay/input file; message carries the 1-based line number.
struct ParseError : Error {
  using Error::Error;
};

// Report artifact could not be written.
struct IOError : Error {
  using Error::Error;
};

}  // namespace mixreg
