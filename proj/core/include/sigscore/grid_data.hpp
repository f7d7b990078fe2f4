#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigscore/paths.hpp"

namespace sigscore {

/// Seconds since 1970-01-01T00:00:00Z for "YYYY-MM-DDTHH:MM[:SS][Z]" or
/// "YYYY-MM-DD". Throws ErrorKind::Ingestion on anything else.
std::int64_t parse_iso8601(const std::string& text);

/// Inverse of parse_iso8601, always "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(std::int64_t epoch_seconds);

struct GridAxes {
  std::vector<double> lat_centers;
  std::vector<LatBounds> lat_bounds;
  std::vector<double> lon_centers;

  std::size_t n_lat() const noexcept { return lat_centers.size(); }
  std::size_t n_lon() const noexcept { return lon_centers.size(); }

  /// Monotone centres inside their bounds, lon in [-180, 360).
  void validate() const;

  friend bool operator==(const GridAxes&, const GridAxes&) = default;
};

struct GridVariable {
  std::string name;
  std::string units;
  std::vector<double> values;

  friend bool operator==(const GridVariable&, const GridVariable&) = default;
};

/// Ensemble forecast archive, values laid out (init, lead, member, lat, lon).
struct EnsembleForecastGrid {
  std::vector<std::string> init_times;
  std::vector<double> lead_hours;
  std::size_t members = 0;
  GridAxes axes;
  std::vector<GridVariable> variables;

  std::size_t n_init() const noexcept { return init_times.size(); }
  std::size_t n_lead() const noexcept { return lead_hours.size(); }
  std::size_t value_count() const noexcept {
    return n_init() * n_lead() * members * axes.n_lat() * axes.n_lon();
  }
  void validate() const;

  friend bool operator==(const EnsembleForecastGrid&, const EnsembleForecastGrid&) = default;
};

/// Verifying analysis, values laid out (time, lat, lon).
struct ObservationGrid {
  std::vector<std::string> times;
  GridAxes axes;
  std::vector<GridVariable> variables;

  std::size_t n_times() const noexcept { return times.size(); }
  std::size_t value_count() const noexcept { return n_times() * axes.n_lat() * axes.n_lon(); }
  void validate() const;

  friend bool operator==(const ObservationGrid&, const ObservationGrid&) = default;
};

/// Forecast values (init, lead, member, lat, lon) next to the observation
/// valid at init + lead, laid out (init, lead, lat, lon).
struct AlignedVariable {
  std::string name;
  std::string units;
  std::vector<double> forecast;
  std::vector<double> observation;
};

struct VerificationSet {
  std::vector<std::string> init_times;
  std::vector<double> lead_hours;
  std::size_t members = 0;
  GridAxes axes;
  std::vector<AlignedVariable> variables;

  std::size_t n_init() const noexcept { return init_times.size(); }
  std::size_t n_lead() const noexcept { return lead_hours.size(); }
  std::size_t n_lat() const noexcept { return axes.n_lat(); }
  std::size_t n_lon() const noexcept { return axes.n_lon(); }

  double forecast(std::size_t v, std::size_t init, std::size_t lead, std::size_t member,
                  std::size_t lat, std::size_t lon) const {
    return variables[v].forecast[(((init * n_lead() + lead) * members + member) * n_lat() + lat) *
                                     n_lon() +
                                 lon];
  }
  double observation(std::size_t v, std::size_t init, std::size_t lead, std::size_t lat,
                     std::size_t lon) const {
    return variables[v].observation[((init * n_lead() + lead) * n_lat() + lat) * n_lon() + lon];
  }
};

/// Pairs every (init, lead) with the observation time equal to the valid
/// time. Missing variables, valid times, or differing grids raise
/// ErrorKind::Alignment.
VerificationSet align(const EnsembleForecastGrid& forecast, const ObservationGrid& obs);

/// Brings two model archives onto common axes. A lead of zero hours that
/// only one model provides is dropped; any remaining disagreement in init
/// times, leads, grid or variables raises ErrorKind::Alignment naming the
/// axes involved.
void harmonize_models(EnsembleForecastGrid& a, EnsembleForecastGrid& b);

/// Keeps the listed init indices, in the order given.
VerificationSet select_inits(const VerificationSet& set, std::span<const std::size_t> indices);

}  // namespace sigscore
