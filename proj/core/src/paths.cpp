#include "sigscore/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sigscore/errors.hpp"

namespace sigscore {
namespace {

void require_strictly_increasing(std::span<const double> times, const char* what) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorKind::InvalidArgument,
                  std::string(what) + " must be strictly increasing (index " + std::to_string(i) +
                      ")");
    }
  }
}

bool strictly_monotone(std::span<const double> v) {
  if (v.size() < 2) return true;
  const bool ascending = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (ascending ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
  }
  return true;
}

double median_spacing(std::span<const double> times) {
  if (times.size() < 2) return 1.0;
  std::vector<double> gaps;
  gaps.reserve(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) gaps.push_back(times[i] - times[i - 1]);
  std::sort(gaps.begin(), gaps.end());
  const std::size_t mid = gaps.size() / 2;
  return gaps.size() % 2 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
}

void check_window(const GridField& field, IndexRange window) {
  if (window.end > field.n_times() || window.begin >= window.end) {
    throw Error(ErrorKind::OutOfRange, "time window [" + std::to_string(window.begin) + ", " +
                                           std::to_string(window.end) + ") outside field of " +
                                           std::to_string(field.n_times()) + " times");
  }
  if (window.size() < 2) {
    throw Error(ErrorKind::PathTooShort, "time window must contain at least 2 points");
  }
}

}  // namespace

DataStream::DataStream(std::vector<double> times, Matrix values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty()) throw Error(ErrorKind::PathTooShort, "data stream needs at least 1 point");
  if (values_.rows() != times_.size()) {
    throw Error(ErrorKind::Shape, "stream has " + std::to_string(times_.size()) + " times but " +
                                      std::to_string(values_.rows()) + " rows");
  }
  if (values_.cols() == 0) throw Error(ErrorKind::Shape, "stream dimension must be positive");
  require_strictly_increasing(times_, "stream times");
  for (double t : times_) {
    if (!std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "non-finite time stamp");
  }
  for (std::size_t r = 0; r < values_.rows(); ++r) {
    for (double x : values_.row(r)) {
      if (!std::isfinite(x)) {
        throw Error(ErrorKind::InvalidArgument,
                    "non-finite stream value in row " + std::to_string(r));
      }
    }
  }
}

DataStream DataStream::with_unit_times(Matrix values) {
  std::vector<double> times(values.rows());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i);
  return DataStream(std::move(times), std::move(values));
}

std::vector<double> interpolate_linear(const DataStream& stream, double t) {
  const auto times = stream.times();
  if (!(t >= times.front() && t <= times.back())) {
    throw Error(ErrorKind::OutOfRange, "t = " + std::to_string(t) + " outside [" +
                                           std::to_string(times.front()) + ", " +
                                           std::to_string(times.back()) + "]");
  }
  // first knot strictly greater than t; the bracketing segment starts before it
  auto upper = std::upper_bound(times.begin(), times.end(), t);
  if (upper == times.end()) {
    auto last = stream.point(stream.size() - 1);
    return {last.begin(), last.end()};
  }
  const std::size_t hi = static_cast<std::size_t>(upper - times.begin());
  const std::size_t lo = hi - 1;
  const double frac = (t - times[lo]) / (times[hi] - times[lo]);
  auto a = stream.point(lo);
  auto b = stream.point(hi);
  std::vector<double> out(stream.dim());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + frac * (b[k] - a[k]);
  return out;
}

DataStream augment(const DataStream& stream, const AugmentationPipeline& pipeline) {
  if (!(pipeline.pre_scale > 0.0) || !std::isfinite(pipeline.pre_scale)) {
    throw Error(ErrorKind::InvalidArgument, "pre_scale must be a positive finite number");
  }
  std::vector<double> times(stream.times().begin(), stream.times().end());
  Matrix values = stream.values();

  if (pipeline.pre_scale != 1.0) {
    for (double& x : values.data()) x *= pipeline.pre_scale;
  }

  if (pipeline.use_lead_lag) {
    const std::size_t n = values.rows();
    const std::size_t d = values.cols();
    Matrix lagged(2 * n - 1, 2 * d);
    std::vector<double> lag_times(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      auto x = values.row(i);
      auto out = lagged.row(2 * i);
      std::copy(x.begin(), x.end(), out.begin());
      std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(d));
      lag_times[2 * i] = times[i];
      if (i + 1 < n) {
        // lead coordinate steps first, lag catches up on the next row
        auto next = values.row(i + 1);
        auto mid = lagged.row(2 * i + 1);
        std::copy(next.begin(), next.end(), mid.begin());
        std::copy(x.begin(), x.end(), mid.begin() + static_cast<std::ptrdiff_t>(d));
        lag_times[2 * i + 1] = 0.5 * (times[i] + times[i + 1]);
      }
    }
    values = std::move(lagged);
    times = std::move(lag_times);
  }

  if (pipeline.use_time) {
    const std::size_t d = values.cols();
    Matrix timed(values.rows(), d + 1);
    for (std::size_t i = 0; i < values.rows(); ++i) {
      auto src = values.row(i);
      auto dst = timed.row(i);
      std::copy(src.begin(), src.end(), dst.begin());
      dst[d] = times[i];
    }
    values = std::move(timed);
  }

  if (pipeline.use_basepoint) {
    const double start = times.front() - median_spacing(times);
    Matrix based(values.rows() + 1, values.cols(), 0.0);
    for (std::size_t i = 0; i < values.rows(); ++i) {
      auto src = values.row(i);
      std::copy(src.begin(), src.end(), based.row(i + 1).begin());
    }
    times.insert(times.begin(), start);
    values = std::move(based);
  }

  return DataStream(std::move(times), std::move(values));
}

DataStream rescale_times(const DataStream& stream, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorKind::InvalidArgument, "time factor must be positive");
  std::vector<double> times(stream.times().begin(), stream.times().end());
  for (double& t : times) t *= factor;
  return DataStream(std::move(times), stream.values());
}

double KernelNormalization::apply(double x, std::size_t path_dim) const {
  const double z = (x - mean) / std;
  return scale_by_dimension ? z / std::sqrt(static_cast<double>(path_dim)) : z;
}

GridField::GridField(std::vector<double> times, std::vector<double> lat_centers,
                     std::vector<double> lon_centers, std::vector<double> data)
    : times_(std::move(times)),
      lat_centers_(std::move(lat_centers)),
      lon_centers_(std::move(lon_centers)),
      data_(std::move(data)) {
  if (times_.empty() || lat_centers_.empty() || lon_centers_.empty()) {
    throw Error(ErrorKind::Shape, "grid field axes must be non-empty");
  }
  require_strictly_increasing(times_, "field times");
  for (double lat : lat_centers_) {
    if (!(lat >= -90.0 && lat <= 90.0)) {
      throw Error(ErrorKind::InvalidArgument, "latitude " + std::to_string(lat) +
                                                  " outside [-90, 90]");
    }
  }
  for (double lon : lon_centers_) {
    if (!(lon >= -180.0 && lon < 360.0)) {
      throw Error(ErrorKind::InvalidArgument, "longitude " + std::to_string(lon) +
                                                  " outside [-180, 360)");
    }
  }
  if (!strictly_monotone(lat_centers_) || !strictly_monotone(lon_centers_)) {
    throw Error(ErrorKind::InvalidArgument, "grid coordinates must be strictly monotone");
  }
  const std::size_t expected = times_.size() * lat_centers_.size() * lon_centers_.size();
  if (data_.size() != expected) {
    throw Error(ErrorKind::Shape, "grid field has " + std::to_string(data_.size()) +
                                      " values, expected " + std::to_string(expected));
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k])) {
      throw Error(ErrorKind::InvalidArgument, "non-finite grid value at flat index " +
                                                  std::to_string(k));
    }
  }
}

GridField normalize_for_kernel(const GridField& field, double obs_mean, double obs_std,
                               std::size_t path_dim) {
  if (!(obs_std > 0.0) || !std::isfinite(obs_std)) {
    throw Error(ErrorKind::DegenerateStatistics,
                "observation standard deviation must be positive, got " + std::to_string(obs_std));
  }
  if (path_dim == 0) throw Error(ErrorKind::InvalidArgument, "path dimension must be positive");
  const KernelNormalization norm{obs_mean, obs_std, true};
  std::vector<double> data(field.data().begin(), field.data().end());
  for (double& x : data) x = norm.apply(x, path_dim);
  return GridField({field.times().begin(), field.times().end()},
                   {field.lat_centers().begin(), field.lat_centers().end()},
                   {field.lon_centers().begin(), field.lon_centers().end()}, std::move(data));
}

std::vector<std::pair<std::size_t, DataStream>> latitude_slice_streams(const GridField& field,
                                                                       IndexRange window) {
  check_window(field, window);
  const std::vector<double> times(field.times().begin() + static_cast<std::ptrdiff_t>(window.begin),
                                  field.times().begin() + static_cast<std::ptrdiff_t>(window.end));
  std::vector<std::pair<std::size_t, DataStream>> slices;
  slices.reserve(field.n_lat());
  for (std::size_t j = 0; j < field.n_lat(); ++j) {
    Matrix values(window.size(), field.n_lon());
    for (std::size_t t = 0; t < window.size(); ++t) {
      for (std::size_t i = 0; i < field.n_lon(); ++i) values(t, i) = field.at(window.begin + t, j, i);
    }
    slices.emplace_back(j, DataStream(times, std::move(values)));
  }
  return slices;
}

std::vector<std::size_t> patch_indices(std::size_t n_lat, std::size_t n_lon, PatchShape shape,
                                       std::size_t lat_start, std::size_t lon_start) {
  if (shape.lat == 0 || shape.lon == 0) throw Error(ErrorKind::InvalidArgument, "empty patch shape");
  if (lat_start + shape.lat > n_lat) {
    throw Error(ErrorKind::OutOfRange, "patch rows [" + std::to_string(lat_start) + ", " +
                                           std::to_string(lat_start + shape.lat) +
                                           ") exceed latitude count " + std::to_string(n_lat));
  }
  if (shape.lon > n_lon) {
    throw Error(ErrorKind::OutOfRange, "patch width exceeds longitude count");
  }
  std::vector<std::size_t> idx;
  idx.reserve(shape.lat * shape.lon);
  for (std::size_t a = 0; a < shape.lat; ++a) {
    for (std::size_t b = 0; b < shape.lon; ++b) {
      idx.push_back((lat_start + a) * n_lon + (lon_start + b) % n_lon);
    }
  }
  return idx;
}

std::vector<DataStream> extract_patches(const GridField& field, PatchShape shape,
                                        std::span<const std::size_t> lat_starts,
                                        std::span<const std::size_t> lon_starts,
                                        IndexRange window) {
  check_window(field, window);
  const std::vector<double> times(field.times().begin() + static_cast<std::ptrdiff_t>(window.begin),
                                  field.times().begin() + static_cast<std::ptrdiff_t>(window.end));
  const std::size_t plane = field.n_lat() * field.n_lon();
  std::vector<DataStream> patches;
  patches.reserve(lat_starts.size() * lon_starts.size());
  for (std::size_t lat0 : lat_starts) {
    for (std::size_t lon0 : lon_starts) {
      const auto idx = patch_indices(field.n_lat(), field.n_lon(), shape, lat0, lon0);
      Matrix values(window.size(), idx.size());
      for (std::size_t t = 0; t < window.size(); ++t) {
        const double* frame = field.data().data() + (window.begin + t) * plane;
        for (std::size_t k = 0; k < idx.size(); ++k) values(t, k) = frame[idx[k]];
      }
      patches.emplace_back(times, std::move(values));
    }
  }
  return patches;
}

}  // namespace sigscore
