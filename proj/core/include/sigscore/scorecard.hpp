#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigscore/grid_data.hpp"
#include "sigscore/metrics.hpp"
#include "sigscore/scoring.hpp"
#include "sigscore/sigkernel.hpp"

namespace sigscore {

enum class RegionKind { NorthernHemisphere, Tropics, SouthernHemisphere, Custom };

/// Latitude band. Standard bands: NH [20, 90], Tropics [-20, 20),
/// SH [-90, -20). Custom bands are [lower, upper).
struct Region {
  RegionKind kind = RegionKind::Custom;
  std::string name;
  double lower = -90.0;
  double upper = 90.0;

  bool contains(double lat) const;

  static Region northern_hemisphere();
  static Region tropics();
  static Region southern_hemisphere();
  static Region custom(double lower, double upper);

  friend bool operator==(const Region&, const Region&) = default;
};

/// "NH", "TR", "SH" or "lo:hi" in degrees.
Region parse_region(const std::string& text);
std::vector<Region> standard_regions();

/// Row indices of `axes` whose centre falls in `region`; throws
/// ErrorKind::EmptyRegion when there are none.
std::vector<std::size_t> region_rows(const GridAxes& axes, const Region& region);

enum class ScoreMetric { Rmse, Mse, Crps, EnsMse, Sigk };
enum class Orientation { LowerBetter, HigherBetter };

/// Case-insensitive; "ACC" and unknown names raise ErrorKind::UnsupportedMetric.
ScoreMetric parse_metric(const std::string& text);
std::string to_string(ScoreMetric metric);
Orientation orientation(ScoreMetric metric);

/// s (baseline - target) / max(|baseline|, 1e-12), s = +1 for lower-better
/// and -1 for higher-better, clamped to [-1, 1]. Positive favours target.
double normalized_difference(double target, double baseline, Orientation orientation);
/// Same without the clamp.
double raw_normalized_difference(double target, double baseline, Orientation orientation);

/// Indices i * n / count for i < count, count = ceil(fraction * n).
std::vector<std::size_t> subsample_indices(std::size_t n, double fraction);

template <typename T>
std::vector<T> subsample_inits(std::span<const T> inits, double fraction) {
  std::vector<T> out;
  for (std::size_t i : subsample_indices(inits.size(), fraction)) out.push_back(inits[i]);
  return out;
}

/// Mean and population standard deviation of every observation value of
/// variable `v`; used to standardise kernel inputs.
struct ObservationStats {
  double mean = 0.0;
  double std = 1.0;
};
ObservationStats observation_stats(const VerificationSet& set, std::size_t v);

struct PathLengthRange {
  std::size_t min = 2;
  std::size_t max = 0;  ///< 0 means lead count - 1
};

struct SigkOptions {
  SigKernelConfig kernel{};
  SigMode mode = SigMode::Score;
  AugmentationPipeline augmentation = kScoringAugmentation;
  PathLengthRange path_lengths{};
};

struct AxisValue {
  std::size_t axis = 0;
  double value = 0.0;
};

/// For each path length k: per init, the first k + 1 leads of every member
/// and of the observations (time stamps u / (L - 1)) are standardised with
/// `stats`, sliced by latitude over the region and scored; the result is
/// the latitude-weighted sum averaged over init times.
std::vector<AxisValue> sigk_by_pathlength(const VerificationSet& set, std::size_t v,
                                          const Region& region, const SigkOptions& options,
                                          const ObservationStats& stats);

/// Per-lead metric (axis 1..L) over the region, averaged over init times.
/// RMSE and MSE average over members; ENSMSE scores the ensemble mean.
std::vector<AxisValue> classical_by_lead(const VerificationSet& set, std::size_t v,
                                         const Region& region, ScoreMetric metric);

struct ScorecardCell {
  std::string variable;
  std::string region;
  std::string metric;
  std::size_t axis = 0;
  double target = 0.0;
  double baseline = 0.0;
  double normalized_diff = 0.0;
};

struct Scorecard {
  std::string target_name;
  std::string baseline_name;
  std::vector<std::string> init_times;
  std::vector<ScorecardCell> cells;
};

struct ScorecardOptions {
  std::vector<Region> regions = standard_regions();
  std::vector<ScoreMetric> metrics{ScoreMetric::Rmse, ScoreMetric::Crps, ScoreMetric::Sigk};
  SigkOptions sigk{};
  std::string target_name = "target";
  std::string baseline_name = "baseline";
};

/// Cells for every (variable, region, metric, axis) in the order given by
/// the options. Both sets must share init times, leads, grid, variables and
/// observations, otherwise ErrorKind::Alignment lists the offending axes.
Scorecard build_scorecard(const VerificationSet& target, const VerificationSet& baseline,
                          const ScorecardOptions& options);

std::string scorecard_csv(const Scorecard& card);
std::string scorecard_json(const Scorecard& card);
std::string scorecard_svg(const Scorecard& card);

struct SigkRow {
  std::string variable;
  std::string region;
  std::string mode;
  std::size_t path_length = 0;
  double value = 0.0;
};

struct EvaluationReport {
  MetricReport metrics;
  std::vector<SigkRow> sigk;
};

struct EvaluationOptions {
  std::vector<Region> regions = standard_regions();
  SigkOptions sigk{};
  std::vector<SigMode> sig_modes{SigMode::Distance};
};

/// Metric suite per variable over every (init, lead) sample plus SIGK
/// tables per region and path length.
EvaluationReport evaluate(const VerificationSet& set, const EvaluationOptions& options);

std::string metrics_csv(const EvaluationReport& report);
std::string sigk_csv(const EvaluationReport& report);
std::string evaluation_json(const EvaluationReport& report);

/// Shortest round-trip decimal form; "nan" and "inf" spelled out.
std::string format_number(double x);

}  // namespace sigscore
