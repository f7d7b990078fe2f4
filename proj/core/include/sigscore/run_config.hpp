#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sigscore/scorecard.hpp"
#include "sigscore/sigkernel.hpp"
#include "sigscore/toy_models.hpp"

namespace sigscore {

/// Synthetic prequential demonstration: AR(1) data on a lat x lon grid fitted
/// over a (coefficient, noise) grid with a single patch covering the field.
struct PreqDemoConfig {
  ToyFamily family = ToyFamily::Ar1;
  ToyParams truth{0.7, 0.5};
  std::size_t steps = 200;
  std::size_t n_lat = 16;
  std::size_t n_lon = 16;
  std::size_t window = 10;
  std::size_t path_len = 5;
  std::size_t members = 3;
  std::vector<double> coefficients{0.3, 0.5, 0.7, 0.9, 0.95};
  std::vector<double> noises{0.2, 0.35, 0.5, 0.7, 1.0};
};

struct RunConfig {
  SigKernelConfig kernel{};
  AugmentationPipeline augmentation = kScoringAugmentation;
  PathLengthRange path_lengths{};
  std::vector<Region> regions = standard_regions();
  std::vector<ScoreMetric> metrics{ScoreMetric::Rmse, ScoreMetric::Crps, ScoreMetric::Sigk};
  std::vector<SigMode> sig_modes{SigMode::Distance};
  SigMode scorecard_sig_mode = SigMode::Score;
  double subsample = 1.0;
  std::filesystem::path out_dir = "sigscore-out";
  std::uint64_t seed = 0;
  bool svg = false;
  PreqDemoConfig preq{};

  /// Throws ErrorKind::Config on the first violated precondition.
  void validate() const;
};

/// Parses a JSON document; unknown keys are rejected. Missing keys keep
/// their defaults.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

SigMode parse_sig_mode(const std::string& text);
StaticKernelKind parse_static_kernel(const std::string& text);
ToyFamily parse_toy_family(const std::string& text);

}  // namespace sigscore
