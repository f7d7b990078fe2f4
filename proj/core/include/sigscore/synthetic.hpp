#pragma once

#include <cstddef>
#include <cstdint>

#include "sigscore/grid_data.hpp"

namespace sigscore {

/// Layout of a synthetic verification archive: daily inits, 6-hourly leads,
/// regular latitude bands from north to south and evenly spaced longitudes.
struct SyntheticSpec {
  std::size_t n_lat = 8;
  std::size_t n_lon = 16;
  std::size_t n_init = 20;
  std::size_t n_lead = 10;
  std::size_t members = 5;
  double lead_step_hours = 6.0;
  double init_step_hours = 24.0;
  std::string first_init = "2020-01-01T00:00:00Z";
  bool include_lead_zero = false;
};

GridAxes regular_axes(std::size_t n_lat, std::size_t n_lon);

/// One variable "t" on lead_step-spaced times covering every valid time:
/// per-cell AR(1) anomalies (coefficient 0.9, unit stationary variance)
/// over a mean of 2 sin(latitude).
ObservationGrid make_synthetic_observations(const SyntheticSpec& spec, std::uint64_t seed);

/// Members equal the verifying observation plus independent N(0, noise^2)
/// perturbations (none when noise is 0).
EnsembleForecastGrid make_noisy_forecast(const SyntheticSpec& spec, const ObservationGrid& obs,
                                         double noise, std::uint64_t seed);

}  // namespace sigscore
