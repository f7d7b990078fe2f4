#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sigscore/matrix.hpp"
#include "sigscore/paths.hpp"
#include "sigscore/sigkernel.hpp"

namespace sigscore {

enum class SigMode { Score, Distance };

/// Ensemble members sharing dimension and knot times.
struct EnsemblePaths {
  std::vector<DataStream> members;
};

/// Unbiased kernel score from precomputed terms:
/// sum_{r != s} K(X^r, X^s) / (m (m - 1)) - 2/m sum_r K(X^r, y).
double kernel_score_from_gram(const Matrix& member_gram, std::span<const double> member_obs);

/// Unbiased signature kernel score of an ensemble against one observed
/// path; lower is better. Paths are used as given (augment beforehand).
double kernel_score(std::span<const DataStream> members, const DataStream& obs,
                    const SigKernelConfig& cfg);

/// Squared signature kernel distance K(x,x) + K(y,y) - 2 K(x,y).
double kernel_distance(const DataStream& forecast, const DataStream& obs,
                       const SigKernelConfig& cfg);

/// One initialisation: member fields and the verifying field, each indexed
/// (path position, lat, lon) on the same grid and time stamps.
struct ForecastCase {
  std::vector<GridField> members;
  GridField observation;
};

/// Latitude-sliced score: sum_j w_j sum_cases value(j, case), where value is
/// the kernel score (Score) or squared distance (Distance) between slice
/// paths after augmentation. Distance mode compares the member-mean path
/// when more than one member is present.
double lat_weighted_sig_score(std::span<const ForecastCase> cases, std::span<const double> weights,
                              SigMode mode, const SigKernelConfig& cfg,
                              const AugmentationPipeline& augmentation = kScoringAugmentation);

/// Static latent draws indexed (member, path position); reused for every
/// initialisation time.
class LatentPlan {
 public:
  LatentPlan(std::size_t members, std::size_t length, std::size_t dim, std::vector<double> values);

  /// Standard normal draws from a seeded 64-bit Mersenne twister.
  static LatentPlan gaussian(std::size_t members, std::size_t length, std::size_t dim,
                             std::uint64_t seed);

  std::size_t members() const noexcept { return members_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> latent(std::size_t member, std::size_t position) const {
    return {values_.data() + (member * length_ + position) * dim_, dim_};
  }

 private:
  std::size_t members_;
  std::size_t length_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// One-step conditional sampler: maps the k most recent states (k x d,
/// oldest first) and a latent vector to the next state. Must be
/// deterministic in its arguments.
struct GeneratorContract {
  using Step = std::function<std::vector<double>(const Matrix& window, std::span<const double> latent)>;

  std::size_t window_size = 1;
  Step step;
};

/// Sliding-window recursion: step u conditions on the k most recent rows of
/// initial_window followed by the member's own generated prefix. Member
/// paths carry times 1..path_len.
EnsemblePaths generate_sliding(const GeneratorContract& gen, const Matrix& initial_window,
                               std::size_t path_len, const LatentPlan& latents);

/// Patch restriction for the prequential objective. Rows of the observation
/// matrix are lat-major J x I grids.
struct PatchSpec {
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;
  PatchShape shape{};
  std::vector<std::size_t> lat_starts;
  std::vector<std::size_t> lon_starts;
};

struct PrequentialOptions {
  std::size_t window = 1;    ///< k, conditioning window length
  std::size_t path_len = 1;  ///< l, generated path length
  AugmentationPipeline augmentation = kScoringAugmentation;
  KernelNormalization normalization{};
  std::optional<PatchSpec> patching;
};

/// Sum over initialisation rows t = k .. T - l (zero-based: window rows
/// [t - k, t), target rows [t, t + l)) of the unbiased kernel score of the
/// generated ensemble against the realised continuation. Paths use time
/// stamps u / l for u = 1..l before augmentation. With patching, the inner
/// score is summed over patch-restricted paths.
double prequential_objective(const GeneratorContract& gen, const Matrix& observations,
                             const PrequentialOptions& options, const SigKernelConfig& cfg,
                             const LatentPlan& latents);

}  // namespace sigscore
