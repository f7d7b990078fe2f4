#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sigscore/matrix.hpp"

namespace sigscore {

/// Ordered, time-stamped multivariate sequence: the discrete form of a
/// piecewise-linear path. Row i of `values` is the observation at times[i].
class DataStream {
 public:
  DataStream() = default;
  /// Throws ErrorKind::Shape / InvalidArgument when times are not strictly
  /// increasing, sizes disagree, or any entry is non-finite.
  DataStream(std::vector<double> times, Matrix values);

  /// Stream with times 0, 1, ..., N-1.
  static DataStream with_unit_times(Matrix values);

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t dim() const noexcept { return values_.cols(); }

  std::span<const double> times() const noexcept { return times_; }
  double time(std::size_t i) const { return times_[i]; }
  std::span<const double> point(std::size_t i) const { return values_.row(i); }
  const Matrix& values() const noexcept { return values_; }

  friend bool operator==(const DataStream&, const DataStream&) = default;

 private:
  std::vector<double> times_;
  Matrix values_;
};

/// Evaluates the linear interpolant of `stream` at time t. Exact at knots.
std::vector<double> interpolate_linear(const DataStream& stream, double t);

/// Path augmentations. Application order is fixed:
/// pre_scale, then lead-lag, then time, then basepoint.
struct AugmentationPipeline {
  bool use_basepoint = false;
  bool use_time = false;
  bool use_lead_lag = false;
  double pre_scale = 1.0;

  std::size_t output_dim(std::size_t input_dim) const {
    return input_dim * (use_lead_lag ? 2 : 1) + (use_time ? 1 : 0);
  }
};

/// Basepoint + time, the default used for scoring.
inline constexpr AugmentationPipeline kScoringAugmentation{true, true, false, 1.0};

DataStream augment(const DataStream& stream, const AugmentationPipeline& pipeline);

/// Same stream with every time stamp multiplied by `factor` (> 0).
DataStream rescale_times(const DataStream& stream, double factor);

/// Observation-based standardisation followed by the 1/sqrt(path_dim)
/// stabilisation constant.
struct KernelNormalization {
  double mean = 0.0;
  double std = 1.0;
  bool scale_by_dimension = true;

  double apply(double x, std::size_t path_dim) const;
};

/// Latitude extent of one grid row, in degrees.
struct LatBounds {
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const LatBounds&, const LatBounds&) = default;
};

/// Field indexed (time, lat, lon), row-major.
class GridField {
 public:
  GridField() = default;
  GridField(std::vector<double> times, std::vector<double> lat_centers,
            std::vector<double> lon_centers, std::vector<double> data);

  std::size_t n_times() const noexcept { return times_.size(); }
  std::size_t n_lat() const noexcept { return lat_centers_.size(); }
  std::size_t n_lon() const noexcept { return lon_centers_.size(); }

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> lat_centers() const noexcept { return lat_centers_; }
  std::span<const double> lon_centers() const noexcept { return lon_centers_; }
  std::span<const double> data() const noexcept { return data_; }

  double at(std::size_t t, std::size_t lat, std::size_t lon) const {
    return data_[(t * n_lat() + lat) * n_lon() + lon];
  }

  friend bool operator==(const GridField&, const GridField&) = default;

 private:
  std::vector<double> times_;
  std::vector<double> lat_centers_;
  std::vector<double> lon_centers_;
  std::vector<double> data_;
};

/// Half-open index range [begin, end) along the time axis.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
};

/// Maps each entry to ((x - obs_mean) / obs_std) / sqrt(path_dim).
GridField normalize_for_kernel(const GridField& field, double obs_mean, double obs_std,
                               std::size_t path_dim);

/// One stream per latitude index; stream dimension equals the longitude count.
std::vector<std::pair<std::size_t, DataStream>> latitude_slice_streams(const GridField& field,
                                                                       IndexRange window);

struct PatchShape {
  std::size_t lat = 0;
  std::size_t lon = 0;
};

/// One stream per (lat_start, lon_start) pair, lat-start major. Values are
/// flattened latitude-major; longitudes wrap modulo the grid width.
std::vector<DataStream> extract_patches(const GridField& field, PatchShape shape,
                                        std::span<const std::size_t> lat_starts,
                                        std::span<const std::size_t> lon_starts,
                                        IndexRange window);

/// Row-level patch gather: picks the flattened indices of a patch from a
/// lat-major row of a J x I grid.
std::vector<std::size_t> patch_indices(std::size_t n_lat, std::size_t n_lon, PatchShape shape,
                                       std::size_t lat_start, std::size_t lon_start);

}  // namespace sigscore
