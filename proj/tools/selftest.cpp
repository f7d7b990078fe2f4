#include "selftest.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sigscore/metrics.hpp"
#include "sigscore/scoring.hpp"
#include "sigscore/sigkernel.hpp"
#include "sigscore/signature.hpp"

namespace sigscore::cli {
namespace {

struct Check {
  std::string name;
  std::function<double()> error;
  double tolerance;
};

DataStream random_walk(std::mt19937_64& rng, std::size_t dim, std::size_t knots, double step) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix values(knots, dim);
  for (std::size_t k = 1; k < knots; ++k) {
    std::vector<double> inc(dim);
    double norm = 0.0;
    for (double& v : inc) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < dim; ++c) values(k, c) = values(k - 1, c) + step * inc[c] / norm;
  }
  return DataStream::with_unit_times(std::move(values));
}

SigKernelConfig linear_kernel(std::size_t order) {
  SigKernelConfig cfg;
  cfg.static_kernel.kind = StaticKernelKind::Linear;
  cfg.dyadic_order = order;
  return cfg;
}

double kernel_vs_signature() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_walk(rng, 2, 4, 0.3);
    const auto y = random_walk(rng, 2, 4, 0.3);
    const double pde = goursat_kernel(x, y, linear_kernel(3));
    const double sig = truncated_inner_product(stream_signature(x, 8), stream_signature(y, 8));
    worst = std::max(worst, std::abs(pde - sig) / std::abs(sig));
  }
  return worst;
}

double unit_segment_constant() {
  double series = 0.0;
  double term = 1.0;
  for (int k = 0; k < 30; ++k) {
    series += term;
    term /= static_cast<double>((k + 1) * (k + 1));
  }
  const auto x = DataStream::with_unit_times(Matrix(2, 1, {0.0, 1.0}));
  return std::abs(goursat_kernel(x, x, linear_kernel(4)) - series);
}

double shuffle_identity() {
  std::mt19937_64 rng(2);
  const auto x = random_walk(rng, 2, 5, 0.8);
  const auto sig = stream_signature(x, 4);
  const Word a{0, 1};
  const Word b{1, 0};
  double rhs = 0.0;
  for (const Word& w : shuffle_words(a, b)) rhs += sig.coefficient(w);
  return std::abs(sig.coefficient(a) * sig.coefficient(b) - rhs);
}

double crps_single_member() {
  const std::vector<double> f{0.0, 2.0};
  const std::vector<double> o{1.0};
  const LatWeights w({1.0});
  const EnsembleView ens{2, 1, 1, 1, f};
  const FieldView obs{1, 1, 1, o};
  return std::abs(crps_empirical(ens, obs, w) - 0.5);
}

double distance_of_identical_paths() {
  std::mt19937_64 rng(3);
  const auto x = random_walk(rng, 3, 6, 0.5);
  return std::abs(kernel_distance(x, x, SigKernelConfig{}));
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::vector<Check> checks{
      {"pde kernel matches truncated signature inner product", kernel_vs_signature, 1e-3},
      {"unit segment self-kernel matches Bessel series", unit_segment_constant, 1e-3},
      {"shuffle identity", shuffle_identity, 1e-9},
      {"ensemble CRPS matches CDF integral", crps_single_member, 1e-12},
      {"kernel distance vanishes on identical paths", distance_of_identical_paths, 1e-10},
  };
  bool ok = true;
  for (const auto& c : checks) {
    const double err = c.error();
    const bool pass = err <= c.tolerance;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << c.name << " (error " << err << ", tolerance "
        << c.tolerance << ")\n";
  }
  return ok;
}

}  // namespace sigscore::cli
