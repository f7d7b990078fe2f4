#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sigscore/matrix.hpp"
#include "sigscore/scoring.hpp"

namespace sigscore {

/// Desk-scale stand-ins for a learned one-step generator.
enum class ToyFamily {
  PersistenceNoise,  ///< x_{t+1} = x_t + noise * z
  Ar1,               ///< x_{t+1} = coefficient * x_t + noise * z
};

std::string_view to_string(ToyFamily family);

struct ToyParams {
  double coefficient = 1.0;  ///< ignored by PersistenceNoise
  double noise = 1.0;

  friend bool operator==(const ToyParams&, const ToyParams&) = default;
};

GeneratorContract make_toy_generator(ToyFamily family, ToyParams params, std::size_t window);

/// T x d independent AR(1) channels started from the stationary law.
Matrix simulate_ar1(std::size_t steps, std::size_t dim, ToyParams truth, std::uint64_t seed);

struct ToyFit {
  ToyParams best;
  double best_objective = 0.0;
  std::vector<ToyParams> grid;
  std::vector<double> objective;  ///< one entry per grid point, grid order
};

/// Evaluates the prequential objective at every grid point with one shared
/// latent plan drawn from `seed`; returns the argmin (first on ties) and the
/// full trace.
ToyFit fit_toy_generator(ToyFamily family, const Matrix& observations,
                         const PrequentialOptions& options, std::size_t members,
                         const SigKernelConfig& cfg, std::span<const ToyParams> grid,
                         std::uint64_t seed);

/// Cartesian product, coefficient-major.
std::vector<ToyParams> make_param_grid(std::span<const double> coefficients,
                                       std::span<const double> noises);

}  // namespace sigscore
