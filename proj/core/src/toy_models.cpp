#include "sigscore/toy_models.hpp"

#include <cmath>
#include <random>

#include "sigscore/errors.hpp"

namespace sigscore {

std::string_view to_string(ToyFamily family) {
  return family == ToyFamily::Ar1 ? "ar1" : "persistence";
}

GeneratorContract make_toy_generator(ToyFamily family, ToyParams params, std::size_t window) {
  const double a = family == ToyFamily::Ar1 ? params.coefficient : 1.0;
  const double noise = params.noise;
  GeneratorContract gen;
  gen.window_size = window;
  gen.step = [a, noise](const Matrix& w, std::span<const double> z) {
    auto last = w.row(w.rows() - 1);
    std::vector<double> next(last.size());
    for (std::size_t c = 0; c < next.size(); ++c) next[c] = a * last[c] + noise * z[c];
    return next;
  };
  return gen;
}

Matrix simulate_ar1(std::size_t steps, std::size_t dim, ToyParams truth, std::uint64_t seed) {
  if (std::abs(truth.coefficient) >= 1.0) {
    throw Error(ErrorKind::InvalidArgument, "AR(1) coefficient must lie in (-1, 1)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(steps, dim);
  const double stationary = truth.noise / std::sqrt(1.0 - truth.coefficient * truth.coefficient);
  for (std::size_t c = 0; c < dim; ++c) out(0, c) = stationary * normal(rng);
  for (std::size_t t = 1; t < steps; ++t) {
    for (std::size_t c = 0; c < dim; ++c) {
      out(t, c) = truth.coefficient * out(t - 1, c) + truth.noise * normal(rng);
    }
  }
  return out;
}

ToyFit fit_toy_generator(ToyFamily family, const Matrix& observations,
                         const PrequentialOptions& options, std::size_t members,
                         const SigKernelConfig& cfg, std::span<const ToyParams> grid,
                         std::uint64_t seed) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "parameter grid is empty");
  const LatentPlan latents =
      LatentPlan::gaussian(members, options.path_len, observations.cols(), seed);
  ToyFit fit;
  fit.grid.assign(grid.begin(), grid.end());
  fit.objective.reserve(grid.size());
  for (const ToyParams& p : grid) {
    const auto gen = make_toy_generator(family, p, options.window);
    fit.objective.push_back(prequential_objective(gen, observations, options, cfg, latents));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < fit.objective.size(); ++i) {
    if (fit.objective[i] < fit.objective[best]) best = i;
  }
  fit.best = fit.grid[best];
  fit.best_objective = fit.objective[best];
  return fit;
}

std::vector<ToyParams> make_param_grid(std::span<const double> coefficients,
                                       std::span<const double> noises) {
  std::vector<ToyParams> grid;
  grid.reserve(coefficients.size() * noises.size());
  for (double a : coefficients) {
    for (double s : noises) grid.push_back({a, s});
  }
  return grid;
}

}  // namespace sigscore
