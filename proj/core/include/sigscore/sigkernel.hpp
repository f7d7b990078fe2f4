#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sigscore/matrix.hpp"
#include "sigscore/paths.hpp"

namespace sigscore {

enum class StaticKernelKind { Rbf, Linear };

struct StaticKernelConfig {
  StaticKernelKind kind = StaticKernelKind::Rbf;
  double sigma = 1.0;  ///< RBF bandwidth; ignored by the linear kernel
};

/// Refinement guard: the grid grows as 4^dyadic_order per knot cell.
inline constexpr std::size_t kMaxDyadicOrder = 6;

struct SigKernelConfig {
  StaticKernelConfig static_kernel{};
  std::size_t dyadic_order = 1;

  /// Throws ErrorKind::Config on sigma <= 0 (RBF) or dyadic order > 6.
  void validate() const;
};

/// Linear: <x, y>. RBF: exp(-|x - y|^2 / (2 sigma^2)).
double static_kernel_eval(const StaticKernelConfig& cfg, std::span<const double> x,
                          std::span<const double> y);

/// Knots of `stream` with 2^dyadic_order equal subdivisions per interval,
/// intermediate points obtained by linear interpolation.
Matrix refine_path(const DataStream& stream, std::size_t dyadic_order);

/// Signature kernel of two piecewise-linear paths, as the terminal value of
/// the Goursat problem d^2K/(ds dt) = K * d^2k(x_s, y_t)/(ds dt), K = 1 on
/// both boundaries. Each refined cell carries the double increment of the
/// static kernel and is advanced with the trapezoidal (bilinear-average)
/// stencil
///   K11 = (K10 + K01 - K00 + C (K10 + K01 + K00) / 4) / (1 - C / 4).
/// Throws NumericalInstabilityError when a coefficient or update is not
/// finite, or when C >= 4 makes the stencil singular.
double goursat_kernel(const DataStream& x, const DataStream& y, const SigKernelConfig& cfg);

struct GramMatrix {
  Matrix entries;
  bool symmetric = false;
};

/// entries(r, s) = goursat_kernel(a[r], b[s]). Entries run on the worker
/// pool (SIGSCORE_THREADS).
GramMatrix gram(std::span<const DataStream> a, std::span<const DataStream> b,
                const SigKernelConfig& cfg);

/// Self-Gram of one family: upper triangle computed, then mirrored.
GramMatrix gram(std::span<const DataStream> a, const SigKernelConfig& cfg);

}  // namespace sigscore
