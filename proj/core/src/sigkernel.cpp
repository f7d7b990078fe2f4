#include "sigscore/sigkernel.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "sigscore/errors.hpp"
#include "sigscore/parallel.hpp"

namespace sigscore {
namespace {

void require_paths(const DataStream& x, const DataStream& y) {
  if (x.size() < 2 || y.size() < 2) {
    throw Error(ErrorKind::PathTooShort, "signature kernel needs paths with at least 2 knots");
  }
  if (x.dim() != y.dim()) {
    throw Error(ErrorKind::Shape, "path dimensions differ: " + std::to_string(x.dim()) + " vs " +
                                      std::to_string(y.dim()));
  }
}

void require_family(std::span<const DataStream> family, std::size_t dim, const char* name) {
  if (family.empty()) throw Error(ErrorKind::InvalidArgument, std::string(name) + " is empty");
  for (const auto& path : family) {
    if (path.dim() != dim) {
      throw Error(ErrorKind::Shape, std::string(name) + " mixes path dimensions");
    }
  }
}

// k(x_p, y_q) for every pair of refined points.
Matrix static_gram(const Matrix& xs, const Matrix& ys, const StaticKernelConfig& cfg) {
  Matrix g(xs.rows(), ys.rows());
  const std::size_t d = xs.cols();
  if (cfg.kind == StaticKernelKind::Linear) {
    for (std::size_t p = 0; p < xs.rows(); ++p) {
      const double* xp = xs.row(p).data();
      for (std::size_t q = 0; q < ys.rows(); ++q) {
        const double* yq = ys.row(q).data();
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += xp[c] * yq[c];
        g(p, q) = dot;
      }
    }
    return g;
  }
  const double scale = -1.0 / (2.0 * cfg.sigma * cfg.sigma);
  for (std::size_t p = 0; p < xs.rows(); ++p) {
    const double* xp = xs.row(p).data();
    for (std::size_t q = 0; q < ys.rows(); ++q) {
      const double* yq = ys.row(q).data();
      double sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = xp[c] - yq[c];
        sq += diff * diff;
      }
      g(p, q) = std::exp(scale * sq);
    }
  }
  return g;
}

}  // namespace

void SigKernelConfig::validate() const {
  if (static_kernel.kind == StaticKernelKind::Rbf &&
      !(static_kernel.sigma > 0.0 && std::isfinite(static_kernel.sigma))) {
    throw Error(ErrorKind::Config, "RBF sigma must be positive");
  }
  if (dyadic_order > kMaxDyadicOrder) {
    throw Error(ErrorKind::Config, "dyadic order " + std::to_string(dyadic_order) +
                                       " exceeds the limit of " + std::to_string(kMaxDyadicOrder));
  }
}

double static_kernel_eval(const StaticKernelConfig& cfg, std::span<const double> x,
                          std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::Shape, "static kernel arguments differ in dimension");
  }
  if (cfg.kind == StaticKernelKind::Linear) {
    double dot = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) dot += x[c] * y[c];
    return dot;
  }
  double sq = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) sq += (x[c] - y[c]) * (x[c] - y[c]);
  return std::exp(-sq / (2.0 * cfg.sigma * cfg.sigma));
}

Matrix refine_path(const DataStream& stream, std::size_t dyadic_order) {
  const std::size_t sub = std::size_t{1} << dyadic_order;
  const std::size_t d = stream.dim();
  const std::size_t n = (stream.size() - 1) * sub + 1;
  Matrix out(n, d);
  std::size_t row = 0;
  for (std::size_t i = 0; i + 1 < stream.size(); ++i) {
    auto a = stream.point(i);
    auto b = stream.point(i + 1);
    for (std::size_t r = 0; r < sub; ++r, ++row) {
      const double frac = static_cast<double>(r) / static_cast<double>(sub);
      auto dst = out.row(row);
      for (std::size_t c = 0; c < d; ++c) dst[c] = a[c] + frac * (b[c] - a[c]);
    }
  }
  auto last = stream.point(stream.size() - 1);
  std::copy(last.begin(), last.end(), out.row(n - 1).begin());
  return out;
}

double goursat_kernel(const DataStream& x, const DataStream& y, const SigKernelConfig& cfg) {
  require_paths(x, y);
  cfg.validate();
  const Matrix xs = refine_path(x, cfg.dyadic_order);
  const Matrix ys = refine_path(y, cfg.dyadic_order);
  const Matrix g = static_gram(xs, ys, cfg.static_kernel);

  const std::size_t rows = xs.rows();
  const std::size_t cols = ys.rows();
  // rolling rows of the solution: prev = K[p, .], cur = K[p + 1, .]
  std::vector<double> prev(cols, 1.0);
  std::vector<double> cur(cols, 1.0);
  for (std::size_t p = 0; p + 1 < rows; ++p) {
    cur[0] = 1.0;
    for (std::size_t q = 0; q + 1 < cols; ++q) {
      const double c = g(p + 1, q + 1) - g(p + 1, q) - g(p, q + 1) + g(p, q);
      if (!std::isfinite(c)) {
        throw NumericalInstabilityError({p, q}, "non-finite static kernel increment");
      }
      if (c >= 4.0) {
        throw NumericalInstabilityError(
            {p, q}, "static kernel increment " + std::to_string(c) +
                        " makes the stencil singular; rescale inputs or raise the dyadic order");
      }
      const double k10 = cur[q];
      const double k01 = prev[q + 1];
      const double k00 = prev[q];
      const double next = (k10 + k01 - k00 + 0.25 * c * (k10 + k01 + k00)) / (1.0 - 0.25 * c);
      if (!std::isfinite(next)) {
        throw NumericalInstabilityError({p, q}, "non-finite kernel value");
      }
      cur[q + 1] = next;
    }
    std::swap(prev, cur);
  }
  return prev[cols - 1];
}

GramMatrix gram(std::span<const DataStream> a, std::span<const DataStream> b,
                const SigKernelConfig& cfg) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidArgument, "empty path family");
  require_family(a, a.front().dim(), "first family");
  require_family(b, a.front().dim(), "second family");
  cfg.validate();
  GramMatrix out{Matrix(a.size(), b.size()), false};
  const std::size_t cols = b.size();
  parallel_for(a.size() * cols, [&](std::size_t flat) {
    const std::size_t r = flat / cols;
    const std::size_t s = flat % cols;
    try {
      out.entries(r, s) = goursat_kernel(a[r], b[s], cfg);
    } catch (const NumericalInstabilityError& e) {
      throw NumericalInstabilityError(e, {r, s});
    }
  });
  return out;
}

GramMatrix gram(std::span<const DataStream> a, const SigKernelConfig& cfg) {
  if (a.empty()) throw Error(ErrorKind::InvalidArgument, "empty path family");
  require_family(a, a.front().dim(), "family");
  cfg.validate();
  const std::size_t n = a.size();
  std::vector<std::pair<std::size_t, std::size_t>> upper;
  upper.reserve(n * (n + 1) / 2);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = r; s < n; ++s) upper.emplace_back(r, s);
  }
  GramMatrix out{Matrix(n, n), true};
  parallel_for(upper.size(), [&](std::size_t k) {
    const auto [r, s] = upper[k];
    try {
      const double v = goursat_kernel(a[r], a[s], cfg);
      out.entries(r, s) = v;
      out.entries(s, r) = v;
    } catch (const NumericalInstabilityError& e) {
      throw NumericalInstabilityError(e, {r, s});
    }
  });
  return out;
}

}  // namespace sigscore
