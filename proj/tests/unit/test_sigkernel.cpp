#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "oracles.hpp"
#include "sigscore/errors.hpp"
#include "sigscore/parallel.hpp"
#include "sigscore/sigkernel.hpp"
#include "sigscore/signature.hpp"

using namespace sigscore;

namespace {

DataStream line(std::vector<double> values, std::size_t dim = 1) {
  const std::size_t n = values.size() / dim;
  return DataStream::with_unit_times(Matrix(n, dim, std::move(values)));
}

SigKernelConfig linear(std::size_t order) {
  SigKernelConfig c;
  c.static_kernel.kind = StaticKernelKind::Linear;
  c.dyadic_order = order;
  return c;
}

}  // namespace

TEST_CASE("static kernels") {
  const std::vector<double> x{1, 2};
  const std::vector<double> y{3, -1};
  CHECK(static_kernel_eval({StaticKernelKind::Linear, 1.0}, x, y) == 1.0);
  CHECK(static_kernel_eval({StaticKernelKind::Rbf, 1.0}, x, x) == 1.0);
  const std::vector<double> z{0, 0};
  const std::vector<double> w{1, 1};
  CHECK(static_kernel_eval({StaticKernelKind::Rbf, 1.0}, z, w) == doctest::Approx(std::exp(-1.0)));
  const std::vector<double> short_vec{1};
  CHECK_THROWS_AS(static_kernel_eval({}, x, short_vec), Error);
}

TEST_CASE("configuration guards") {
  SigKernelConfig c;
  c.dyadic_order = 7;
  CHECK_THROWS_AS(c.validate(), Error);
  c.dyadic_order = 1;
  c.static_kernel.sigma = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("constant path gives kernel one") {
  const auto x = line({0.0, 0.7, -0.2, 1.5});
  const auto y = line({0.3, 0.3, 0.3});
  CHECK(goursat_kernel(x, y, linear(2)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("unit segment self-kernel approaches the Bessel series") {
  const auto x = line({0.0, 1.0});
  const double exact = oracle::bessel_series(1.0);
  double prev = std::abs(goursat_kernel(x, x, linear(0)) - exact);
  for (std::size_t order = 1; order <= 5; ++order) {
    const double err = std::abs(goursat_kernel(x, x, linear(order)) - exact);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(std::abs(goursat_kernel(x, x, linear(4)) - exact) < 1e-3);
}

TEST_CASE("agreement with the truncated signature inner product") {
  gen::Rng rng(61);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t d = gen::index(rng, 1, 3);
    const auto x = gen::walk(rng, d, gen::index(rng, 2, 5));
    const auto y = gen::walk(rng, d, gen::index(rng, 2, 5));
    const double ref = truncated_inner_product(stream_signature(x, 8), stream_signature(y, 8));
    CHECK(goursat_kernel(x, y, linear(3)) == doctest::Approx(ref).epsilon(1e-3));
  }
}

TEST_CASE("symmetry and reparametrisation") {
  gen::Rng rng(67);
  SigKernelConfig rbf;
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = gen::timed_walk(rng, 3, 5, 1.0);
    const auto y = gen::timed_walk(rng, 3, 4, 1.0);
    CHECK(std::abs(goursat_kernel(x, y, rbf) - goursat_kernel(y, x, rbf)) < 1e-10);
  }

  // collinear knot insertion without a time channel
  const auto x = line({0.0, 0.2, 0.5, 0.1, 0.3, 0.4}, 2);
  const auto x_refined = line({0.0, 0.2, 0.25, 0.15, 0.5, 0.1, 0.3, 0.4}, 2);
  const auto y = line({0.1, 0.0, -0.2, 0.3, 0.2, 0.1}, 2);
  CHECK(std::abs(goursat_kernel(x, y, linear(4)) - goursat_kernel(x_refined, y, linear(4))) < 1e-6);

  // with a time channel, non-uniform relabelling is visible
  const AugmentationPipeline with_time{false, true, false, 1.0};
  const DataStream warped({0.0, 0.2, 1.5}, Matrix(3, 2, {0.0, 0.2, 0.5, 0.1, 0.3, 0.4}));
  const double k_uniform = goursat_kernel(augment(x, with_time), augment(y, with_time), linear(3));
  const double k_warped = goursat_kernel(augment(warped, with_time), augment(y, with_time), linear(3));
  CHECK(std::abs(k_uniform - k_warped) > 1e-4);
}

TEST_CASE("dyadic convergence is monotone on most random pairs") {
  gen::Rng rng(71);
  int monotone = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = gen::walk(rng, 2, 4);
    const auto y = gen::walk(rng, 2, 4);
    double k[5];
    for (std::size_t order = 0; order <= 4; ++order) k[order] = goursat_kernel(x, y, linear(order));
    bool ok = true;
    for (int l = 0; l + 2 <= 4; ++l) {
      ok = ok && std::abs(k[l + 2] - k[l + 1]) <= std::abs(k[l + 1] - k[l]);
    }
    monotone += ok;
  }
  CHECK(monotone >= 95);
}

TEST_CASE("RBF coefficients stay bounded") {
  gen::Rng rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = gen::walk(rng, 4, 6, 3.0);
    const auto y = gen::walk(rng, 4, 6, 3.0);
    CHECK(std::isfinite(goursat_kernel(x, y, SigKernelConfig{})));
  }
}

TEST_CASE("instability is reported with its cell") {
  const auto big = line({0.0, 40.0});
  try {
    goursat_kernel(big, big, linear(0));
    FAIL("expected instability");
  } catch (const NumericalInstabilityError& e) {
    CHECK(e.kind() == ErrorKind::NumericalInstability);
    CHECK(e.cell().row == 0);
    CHECK(e.cell().col == 0);
  }
  const std::vector<DataStream> a{line({0.0, 0.05}), big};
  try {
    gram(a, a, linear(0));
    FAIL("expected instability");
  } catch (const NumericalInstabilityError& e) {
    REQUIRE(e.entry().has_value());
    CHECK(e.entry()->row == 1);
    CHECK(e.entry()->col == 1);
  }
}

TEST_CASE("Gram matrices") {
  gen::Rng rng(79);
  std::vector<DataStream> paths;
  for (int i = 0; i < 4; ++i) paths.push_back(augment(gen::walk(rng, 3, 5), kScoringAugmentation));

  const auto self = gram(paths, SigKernelConfig{});
  CHECK(self.symmetric);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(self.entries(r, s) ==
            doctest::Approx(goursat_kernel(paths[r], paths[s], SigKernelConfig{})).epsilon(1e-12));
      CHECK(std::abs(self.entries(r, s) - self.entries(s, r)) < 1e-10);
    }
  }
  CHECK(oracle::min_eigenvalue(self.entries) >= -1e-8);

  const auto lin = gram(paths, linear(1));
  for (std::size_t r = 0; r < 4; ++r) CHECK(lin.entries(r, r) >= 1.0 - 1e-8);

  std::vector<DataStream> swapped{paths[2], paths[0], paths[1], paths[3]};
  const auto cross = gram(swapped, paths, SigKernelConfig{});
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(cross.entries(0, s) == self.entries(2, s));
    CHECK(cross.entries(1, s) == self.entries(0, s));
  }

  const std::vector<DataStream> one{paths[0]};
  const auto single = gram(one, SigKernelConfig{});
  CHECK(single.entries(0, 0) == goursat_kernel(paths[0], paths[0], SigKernelConfig{}));
}

TEST_CASE("Gram is independent of the worker count") {
  gen::Rng rng(83);
  std::vector<DataStream> paths;
  for (int i = 0; i < 6; ++i) paths.push_back(gen::walk(rng, 3, 6));
  ::setenv("SIGSCORE_THREADS", "1", 1);
  const auto a = gram(paths, SigKernelConfig{});
  ::setenv("SIGSCORE_THREADS", "4", 1);
  const auto b = gram(paths, SigKernelConfig{});
  ::unsetenv("SIGSCORE_THREADS");
  CHECK(a.entries == b.entries);
}

TEST_CASE("parallel_for reports the smallest failing index") {
  for (int rep = 0; rep < 5; ++rep) {
    try {
      parallel_for(64, [](std::size_t i) {
        if (i % 7 == 3) throw std::runtime_error(std::to_string(i));
      }, 4);
      FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "3");
    }
  }
  std::vector<int> hits(100, 0);
  parallel_for(100, [&](std::size_t i) {
    parallel_for(1, [&](std::size_t) { hits[i] += 1; }, 4);
  }, 3);
  for (int h : hits) CHECK(h == 1);
}
