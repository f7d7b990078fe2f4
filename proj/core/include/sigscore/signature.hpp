#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sigscore/paths.hpp"

namespace sigscore {

/// Letters are zero-based coordinate indices in [0, dim).
using Word = std::vector<std::size_t>;

/// Truncated signature with dense level tensors. Level k holds dim^k
/// coefficients; the flat row-major index of (i_1, ..., i_k) is
/// i_1 * dim^(k-1) + ... + i_k. Level 0 is the scalar 1.
class TruncatedSignature {
 public:
  /// Largest admissible level size (dim^depth); 2^25 admits dim 4 at depth 12.
  static constexpr std::size_t kMaxLevelEntries = std::size_t{1} << 25;

  /// The unit element: level 0 = 1, every higher level zero.
  TruncatedSignature(std::size_t dim, std::size_t depth);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t depth() const noexcept { return levels_.size() - 1; }

  std::span<const double> level(std::size_t k) const { return levels_[k]; }
  std::span<double> level(std::size_t k) { return levels_[k]; }

  /// Coefficient of a word of length <= depth; the empty word gives 1.
  double coefficient(std::span<const std::size_t> word) const;

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> levels_;
};

/// Signature of a single linear segment with increment gamma:
/// level k is gamma^{(x)k} / k!.
TruncatedSignature segment_signature(std::span<const double> increment, std::size_t depth);

/// Chen concatenation: level k = sum_l level_l(a) (x) level_{k-l}(b).
TruncatedSignature chen_concat(const TruncatedSignature& a, const TruncatedSignature& b);

/// In-place right multiplication by the signature of one linear segment,
/// evaluated level by level with a Horner scheme (no segment tensor is
/// materialised).
void extend_with_segment(TruncatedSignature& sig, std::span<const double> increment);

/// Signature of the piecewise-linear interpolant, extending segment by
/// segment left to right. Requires at least 2 points.
TruncatedSignature stream_signature(const DataStream& stream, std::size_t depth);

/// All order-preserving interleavings of a and b, duplicates kept.
std::vector<Word> shuffle_words(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Signed area between the (i1, i2) projection of the path and its chord.
double levy_area(const DataStream& stream, std::size_t i1, std::size_t i2);

/// Sum over levels of flat dot products, level 0 included.
double truncated_inner_product(const TruncatedSignature& a, const TruncatedSignature& b);

}  // namespace sigscore
