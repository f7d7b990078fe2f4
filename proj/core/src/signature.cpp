#include "sigscore/signature.hpp"

#include <algorithm>
#include <string>

#include "sigscore/errors.hpp"

namespace sigscore {
namespace {

std::size_t checked_level_size(std::size_t dim, std::size_t depth) {
  std::size_t size = 1;
  for (std::size_t k = 0; k < depth; ++k) {
    if (size > TruncatedSignature::kMaxLevelEntries / dim) {
      throw Error(ErrorKind::InvalidArgument,
                  "signature level dim^depth = " + std::to_string(dim) + "^" +
                      std::to_string(depth) + " exceeds the dense storage cap");
    }
    size *= dim;
  }
  return size;
}

void require_same_shape(const TruncatedSignature& a, const TruncatedSignature& b) {
  if (a.dim() != b.dim() || a.depth() != b.depth()) {
    throw Error(ErrorKind::Shape, "signature shapes differ: (dim " + std::to_string(a.dim()) +
                                      ", depth " + std::to_string(a.depth()) + ") vs (dim " +
                                      std::to_string(b.dim()) + ", depth " +
                                      std::to_string(b.depth()) + ")");
  }
}

void shuffle_into(std::span<const std::size_t> a, std::span<const std::size_t> b, Word& prefix,
                  std::vector<Word>& out) {
  if (a.empty() || b.empty()) {
    Word w = prefix;
    w.insert(w.end(), a.begin(), a.end());
    w.insert(w.end(), b.begin(), b.end());
    out.push_back(std::move(w));
    return;
  }
  prefix.push_back(a.front());
  shuffle_into(a.subspan(1), b, prefix, out);
  prefix.back() = b.front();
  shuffle_into(a, b.subspan(1), prefix, out);
  prefix.pop_back();
}

}  // namespace

TruncatedSignature::TruncatedSignature(std::size_t dim, std::size_t depth) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "signature dimension must be positive");
  checked_level_size(dim, depth);
  levels_.resize(depth + 1);
  std::size_t size = 1;
  for (std::size_t k = 0; k <= depth; ++k) {
    levels_[k].assign(size, 0.0);
    size *= dim;
  }
  levels_[0][0] = 1.0;
}

double TruncatedSignature::coefficient(std::span<const std::size_t> word) const {
  if (word.size() > depth()) {
    throw Error(ErrorKind::OutOfRange, "word longer than truncation depth");
  }
  std::size_t flat = 0;
  for (std::size_t letter : word) {
    if (letter >= dim_) throw Error(ErrorKind::OutOfRange, "letter outside path dimension");
    flat = flat * dim_ + letter;
  }
  return levels_[word.size()][flat];
}

TruncatedSignature segment_signature(std::span<const double> increment, std::size_t depth) {
  TruncatedSignature sig(increment.size(), depth);
  const std::size_t d = increment.size();
  for (std::size_t k = 1; k <= depth; ++k) {
    auto prev = sig.level(k - 1);
    auto cur = sig.level(k);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t p = 0; p < prev.size(); ++p) {
      const double scaled = prev[p] * inv_k;
      for (std::size_t i = 0; i < d; ++i) cur[p * d + i] = scaled * increment[i];
    }
  }
  return sig;
}

TruncatedSignature chen_concat(const TruncatedSignature& a, const TruncatedSignature& b) {
  require_same_shape(a, b);
  TruncatedSignature out(a.dim(), a.depth());
  for (std::size_t k = 1; k <= a.depth(); ++k) {
    auto dst = out.level(k);
    for (std::size_t l = 0; l <= k; ++l) {
      auto left = a.level(l);
      auto right = b.level(k - l);
      for (std::size_t p = 0; p < left.size(); ++p) {
        const double lp = left[p];
        if (lp == 0.0) continue;
        double* row = dst.data() + p * right.size();
        for (std::size_t q = 0; q < right.size(); ++q) row[q] += lp * right[q];
      }
    }
  }
  return out;
}

void extend_with_segment(TruncatedSignature& sig, std::span<const double> increment) {
  const std::size_t d = sig.dim();
  if (increment.size() != d) throw Error(ErrorKind::Shape, "increment dimension mismatch");
  std::vector<double> acc;
  std::vector<double> next;
  // new_k = sum_j a_j (x) g^(k-j)/(k-j)!, evaluated as
  // t <- (t (x) g) / (k-j+1) + a_j for j = 1..k, starting from t = a_0 = 1.
  // Levels are rewritten from the top down so lower levels are still the old values.
  for (std::size_t k = sig.depth(); k >= 1; --k) {
    acc.assign(1, 1.0);
    for (std::size_t j = 1; j <= k; ++j) {
      const double inv = 1.0 / static_cast<double>(k - j + 1);
      auto a_j = sig.level(j);
      next.resize(acc.size() * d);
      for (std::size_t p = 0; p < acc.size(); ++p) {
        const double tp = acc[p] * inv;
        double* row = next.data() + p * d;
        const double* add = a_j.data() + p * d;
        for (std::size_t i = 0; i < d; ++i) row[i] = tp * increment[i] + add[i];
      }
      acc.swap(next);
    }
    std::copy(acc.begin(), acc.end(), sig.level(k).begin());
  }
}

TruncatedSignature stream_signature(const DataStream& stream, std::size_t depth) {
  if (stream.size() < 2) {
    throw Error(ErrorKind::PathTooShort, "signature needs at least 2 points");
  }
  const std::size_t d = stream.dim();
  std::vector<double> increment(d);
  TruncatedSignature acc(d, depth);
  for (std::size_t i = 0; i + 1 < stream.size(); ++i) {
    auto x0 = stream.point(i);
    auto x1 = stream.point(i + 1);
    for (std::size_t c = 0; c < d; ++c) increment[c] = x1[c] - x0[c];
    extend_with_segment(acc, increment);
  }
  return acc;
}

std::vector<Word> shuffle_words(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::InvalidArgument, "shuffle operands must be non-empty words");
  }
  std::vector<Word> out;
  Word prefix;
  shuffle_into(a, b, prefix, out);
  return out;
}

double levy_area(const DataStream& stream, std::size_t i1, std::size_t i2) {
  if (i1 == i2) throw Error(ErrorKind::InvalidArgument, "Levy area needs two distinct indices");
  if (i1 >= stream.dim() || i2 >= stream.dim()) {
    throw Error(ErrorKind::OutOfRange, "Levy area index outside path dimension");
  }
  const auto sig = stream_signature(stream, 2);
  const std::size_t ij[] = {i1, i2};
  const std::size_t ji[] = {i2, i1};
  return 0.5 * (sig.coefficient(ij) - sig.coefficient(ji));
}

double truncated_inner_product(const TruncatedSignature& a, const TruncatedSignature& b) {
  require_same_shape(a, b);
  double total = 0.0;
  for (std::size_t k = 0; k <= a.depth(); ++k) {
    auto x = a.level(k);
    auto y = b.level(k);
    double level_sum = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) level_sum += x[p] * y[p];
    total += level_sum;
  }
  return total;
}

}  // namespace sigscore
