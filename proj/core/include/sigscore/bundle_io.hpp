#pragma once

#include <filesystem>
#include <variant>

#include "sigscore/grid_data.hpp"

namespace sigscore {

inline constexpr int kBundleSchemaVersion = 1;

using Bundle = std::variant<EnsembleForecastGrid, ObservationGrid>;

/// Reads a JSON manifest and its raw little-endian float32 payloads (one
/// file per variable, paths relative to the manifest). Every failure is an
/// ErrorKind::Ingestion error naming the offending file or value.
Bundle load_bundle(const std::filesystem::path& manifest);

EnsembleForecastGrid load_forecast_bundle(const std::filesystem::path& manifest);
ObservationGrid load_observation_bundle(const std::filesystem::path& manifest);

/// Writes `<manifest>` plus one `<variable>.f32` file per variable next to
/// it. Values are narrowed to float32.
void write_bundle(const std::filesystem::path& manifest, const EnsembleForecastGrid& grid);
void write_bundle(const std::filesystem::path& manifest, const ObservationGrid& grid);

}  // namespace sigscore
