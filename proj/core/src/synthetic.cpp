#include "sigscore/synthetic.hpp"

#include <cmath>
#include <random>

#include "sigscore/errors.hpp"

namespace sigscore {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::int64_t hours(double h) { return static_cast<std::int64_t>(std::llround(h * 3600.0)); }

}  // namespace

GridAxes regular_axes(std::size_t n_lat, std::size_t n_lon) {
  if (n_lat == 0 || n_lon == 0) throw Error(ErrorKind::InvalidArgument, "empty synthetic grid");
  GridAxes axes;
  const double band = 180.0 / static_cast<double>(n_lat);
  for (std::size_t j = 0; j < n_lat; ++j) {
    const double upper = 90.0 - band * static_cast<double>(j);
    const double lower = j + 1 == n_lat ? -90.0 : upper - band;
    axes.lat_bounds.push_back({lower, upper});
    axes.lat_centers.push_back(0.5 * (lower + upper));
  }
  for (std::size_t i = 0; i < n_lon; ++i) {
    axes.lon_centers.push_back(360.0 * static_cast<double>(i) / static_cast<double>(n_lon));
  }
  return axes;
}

ObservationGrid make_synthetic_observations(const SyntheticSpec& spec, std::uint64_t seed) {
  const std::int64_t start = parse_iso8601(spec.first_init);
  const double span = static_cast<double>(spec.n_init - 1) * spec.init_step_hours +
                      static_cast<double>(spec.n_lead) * spec.lead_step_hours;
  const auto steps = static_cast<std::size_t>(std::llround(span / spec.lead_step_hours)) + 1;

  ObservationGrid obs;
  obs.axes = regular_axes(spec.n_lat, spec.n_lon);
  for (std::size_t t = 0; t < steps; ++t) {
    obs.times.push_back(format_iso8601(start + hours(spec.lead_step_hours * static_cast<double>(t))));
  }
  const std::size_t plane = spec.n_lat * spec.n_lon;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double a = 0.9;
  const double innovation = std::sqrt(1.0 - a * a);
  std::vector<double> anomaly(plane);
  for (double& x : anomaly) x = z(rng);
  GridVariable var{"t", "K", std::vector<double>(steps * plane)};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t j = 0; j < spec.n_lat; ++j) {
      const double mean = 2.0 * std::sin(obs.axes.lat_centers[j] * kPi / 180.0);
      for (std::size_t i = 0; i < spec.n_lon; ++i) {
        double& x = anomaly[j * spec.n_lon + i];
        if (t > 0) x = a * x + innovation * z(rng);
        var.values[t * plane + j * spec.n_lon + i] = mean + x;
      }
    }
  }
  obs.variables.push_back(std::move(var));
  return obs;
}

EnsembleForecastGrid make_noisy_forecast(const SyntheticSpec& spec, const ObservationGrid& obs,
                                         double noise, std::uint64_t seed) {
  if (noise < 0.0) throw Error(ErrorKind::InvalidArgument, "noise must be non-negative");
  EnsembleForecastGrid f;
  f.axes = obs.axes;
  f.members = spec.members;
  const std::int64_t start = parse_iso8601(spec.first_init);
  for (std::size_t i = 0; i < spec.n_init; ++i) {
    f.init_times.push_back(format_iso8601(start + hours(spec.init_step_hours * static_cast<double>(i))));
  }
  for (std::size_t l = spec.include_lead_zero ? 0 : 1; l <= spec.n_lead; ++l) {
    f.lead_hours.push_back(spec.lead_step_hours * static_cast<double>(l));
  }
  const std::size_t plane = obs.axes.n_lat() * obs.axes.n_lon();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  for (const auto& ov : obs.variables) {
    GridVariable var{ov.name, ov.units, {}};
    var.values.reserve(f.value_count());
    for (std::size_t i = 0; i < f.n_init(); ++i) {
      for (std::size_t l = 0; l < f.n_lead(); ++l) {
        const std::int64_t valid = parse_iso8601(f.init_times[i]) + hours(f.lead_hours[l]);
        const auto row = static_cast<std::size_t>((valid - start) / hours(spec.lead_step_hours));
        if (row >= obs.n_times()) throw Error(ErrorKind::OutOfRange, "observations too short");
        for (std::size_t m = 0; m < f.members; ++m) {
          for (std::size_t c = 0; c < plane; ++c) {
            var.values.push_back(ov.values[row * plane + c] + (noise > 0.0 ? noise * z(rng) : 0.0));
          }
        }
      }
    }
    f.variables.push_back(std::move(var));
  }
  return f;
}

}  // namespace sigscore
