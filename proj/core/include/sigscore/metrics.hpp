#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigscore/matrix.hpp"
#include "sigscore/paths.hpp"

namespace sigscore {

/// Area weights L(j), normalised to mean 1 over the rows supplied.
class LatWeights {
 public:
  explicit LatWeights(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t j) const { return weights_[j]; }
  std::span<const double> values() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

/// L(j) = (sin upper_j - sin lower_j) / mean_j(sin upper_j - sin lower_j).
LatWeights lat_weights(std::span<const LatBounds> bounds);

/// Read-only (time, lat, lon) tensor.
struct FieldView {
  std::size_t times = 0;
  std::size_t lats = 0;
  std::size_t lons = 0;
  std::span<const double> values;

  double at(std::size_t t, std::size_t j, std::size_t i) const {
    return values[(t * lats + j) * lons + i];
  }
};

/// Read-only (member, time, lat, lon) tensor.
struct EnsembleView {
  std::size_t members = 0;
  std::size_t times = 0;
  std::size_t lats = 0;
  std::size_t lons = 0;
  std::span<const double> values;

  double at(std::size_t m, std::size_t t, std::size_t j, std::size_t i) const {
    return values[((m * times + t) * lats + j) * lons + i];
  }
  FieldView member(std::size_t m) const {
    const std::size_t n = times * lats * lons;
    return {times, lats, lons, values.subspan(m * n, n)};
  }
};

/// Per-(lat, lon) values with a degeneracy flag for cells whose
/// observations have no variance; flagged cells hold NaN.
struct CellField {
  std::size_t lats = 0;
  std::size_t lons = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> degenerate;

  double at(std::size_t j, std::size_t i) const { return values[j * lons + i]; }
  std::size_t degenerate_count() const;
  /// Latitude-weighted mean over non-degenerate cells; nullopt when none remain.
  std::optional<double> weighted_mean(const LatWeights& w) const;
};

double rmse_lat(FieldView forecast, FieldView obs, const LatWeights& w);

/// RMSE over the range (max - min) of every observation value.
double nrmse(FieldView forecast, FieldView obs, const LatWeights& w);

/// 1 - sum_t (f - o)^2 / sum_t (o - mean_t o)^2 per cell.
CellField r2_field(FieldView forecast, FieldView obs);

/// Latitude-weighted ensemble CRPS in its kernel form,
///   (1 / TM) sum_t [ sum_m |f_m - o|_t - 1/(2M) sum_m sum_n |f_m - f_n|_t ],
/// with |g|_t = (1/IJ) sum_{i,j} L(j) |g_{t,i,j}|. Equals the integral of
/// (F(y) - 1{y >= o})^2 for the empirical ensemble CDF F. A single member
/// reduces to latitude-weighted MAE.
double crps_empirical(EnsembleView forecast, FieldView obs, const LatWeights& w);

/// Time-averaged CRPS per cell (same estimator, no weighting).
CellField crps_field(EnsembleView forecast, FieldView obs);

/// Per-cell CRPS over the per-cell temporal (population) standard deviation
/// of the observations.
CellField ncrps_field(EnsembleView forecast, FieldView obs);

/// Linear interpolation between order statistics, inclusive endpoints
/// (h = (n - 1) p). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

/// `count` probabilities log-spaced in the exceedance 1 - p between
/// 0.1 (p = 0.9) and 1e-4 (p = 0.9999).
std::vector<double> default_rqe_percentiles(std::size_t count = 50);

/// sum_d (Qhat_d - Q_d) / Q_d over pooled samples.
double rqe(std::span<const double> forecast, std::span<const double> obs,
           std::span<const double> percentiles);

/// 0.01, 0.02, ..., 1.00.
std::vector<double> default_credibility_levels();

/// Median over levels alpha of |alpha - coverage(alpha)|, where coverage is
/// the fraction of observations inside the per-case central ensemble
/// interval of mass alpha, [q_{(1 - alpha)/2}, q_{(1 + alpha)/2}]. `ensemble` is M x N (members by
/// cases).
double calibration_error(const Matrix& ensemble, std::span<const double> obs,
                         std::span<const double> levels);

struct VariableMetrics {
  std::string variable;
  double rmse = 0.0;
  std::optional<double> nrmse;
  std::optional<double> r2;
  double crps = 0.0;
  std::optional<double> ncrps;
  std::optional<double> rqe;
  std::optional<double> calibration_error;
  std::size_t degenerate_cells = 0;
};

struct MetricReport {
  std::vector<VariableMetrics> variables;
};

/// Full metric suite for one variable. Time samples are the T axis of the
/// views; R^2 scores the ensemble mean; RMSE averages the member RMSEs.
VariableMetrics compute_variable_metrics(const std::string& name, EnsembleView forecast,
                                         FieldView obs, const LatWeights& w);

}  // namespace sigscore
