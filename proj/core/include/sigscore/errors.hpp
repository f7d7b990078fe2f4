#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sigscore {

enum class ErrorKind {
  InvalidArgument,
  OutOfRange,
  Shape,
  PathTooShort,
  DegenerateStatistics,
  NumericalInstability,
  InsufficientEnsemble,
  InsufficientHistory,
  UndefinedQuantile,
  EmptyRegion,
  UnsupportedMetric,
  Alignment,
  Ingestion,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind drives
/// the CLI exit code mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a PDE coefficient or solution value stops being finite.
/// `cell` is the (p, q) index on the refined grid; `entry` is the Gram
/// location when the failure surfaced inside a batch computation.
class NumericalInstabilityError : public Error {
 public:
  struct Index {
    std::size_t row;
    std::size_t col;
  };

  NumericalInstabilityError(Index cell, const std::string& detail);
  NumericalInstabilityError(const NumericalInstabilityError& inner, Index entry);

  Index cell() const noexcept { return cell_; }
  std::optional<Index> entry() const noexcept { return entry_; }

 private:
  Index cell_;
  std::optional<Index> entry_;
};

}  // namespace sigscore
