#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace infoshape {

// Error taxonomy used across the library. Everything derives from Error so
// callers can catch the whole family, and the CLI maps each kind to a
// structured message + nonzero exit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid dimensions, malformed specs, bad hyperparameters.
struct ConfigError : Error {
  using Error::Error;
};

// An API contract was violated by the caller (empty input, wrong label set, ...).
struct UsageError : Error {
  using Error::Error;
};

// Non-finite numbers or divergence during optimization. When an MI estimator
// diverges, the per-iteration trace collected so far is attached.
struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error(what) {}
  TrainingError(const std::string& what, std::vector<double> partial_trace)
      : Error(what), trace(std::move(partial_trace)) {}
  std::vector<double> trace;
};

// Malformed input file (IDX, dataset, checkpoint, config).
struct ParseError : Error {
  using Error::Error;
};

// Filesystem failures (missing file, failed write).
struct IoError : Error {
  using Error::Error;
};

}  // namespace infoshape
