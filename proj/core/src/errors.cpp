#include "sigscore/errors.hpp"

namespace sigscore {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::OutOfRange: return "out of range";
    case ErrorKind::Shape: return "shape mismatch";
    case ErrorKind::PathTooShort: return "path too short";
    case ErrorKind::DegenerateStatistics: return "degenerate statistics";
    case ErrorKind::NumericalInstability: return "numerical instability";
    case ErrorKind::InsufficientEnsemble: return "insufficient ensemble";
    case ErrorKind::InsufficientHistory: return "insufficient history";
    case ErrorKind::UndefinedQuantile: return "undefined quantile";
    case ErrorKind::EmptyRegion: return "empty region";
    case ErrorKind::UnsupportedMetric: return "unsupported metric";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Ingestion: return "ingestion error";
    case ErrorKind::Config: return "config error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

NumericalInstabilityError::NumericalInstabilityError(Index cell, const std::string& detail)
    : Error(ErrorKind::NumericalInstability,
            detail + " at PDE cell (" + std::to_string(cell.row) + ", " +
                std::to_string(cell.col) + ")"),
      cell_(cell) {}

NumericalInstabilityError::NumericalInstabilityError(const NumericalInstabilityError& inner,
                                                     Index entry)
    : Error(ErrorKind::NumericalInstability,
            std::string(inner.what()).substr(to_string(ErrorKind::NumericalInstability).size() + 2) +
                " in Gram entry (" + std::to_string(entry.row) + ", " +
                std::to_string(entry.col) + ")"),
      cell_(inner.cell()),
      entry_(entry) {}

}  // namespace sigscore
