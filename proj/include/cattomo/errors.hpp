#pragma once

#include <stdexcept>
#include <string>

namespace cattomo {

// Exit-code classes used by the CLI: config -> 2, numerical -> 3, statistical -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Displaced or evolved state no longer fits inside the truncated Fock space.
class TruncationOverflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficiency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Input for which the requested object is undefined (odd cat at alpha = 0, ...).
class DegenerateInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StatisticalError : public Error {
 public:
  using Error::Error;
};

class UnrecoverablePhase : public StatisticalError {
 public:
  using StatisticalError::StatisticalError;
};

class InconsistentBranch : public StatisticalError {
 public:
  using StatisticalError::StatisticalError;
};

}  // namespace cattomo
