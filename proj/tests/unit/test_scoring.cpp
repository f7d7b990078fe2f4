#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sigscore/errors.hpp"
#include "sigscore/scoring.hpp"
#include "sigscore/toy_models.hpp"

using namespace sigscore;

namespace {

SigKernelConfig linear(std::size_t order = 1) {
  SigKernelConfig c;
  c.static_kernel.kind = StaticKernelKind::Linear;
  c.dyadic_order = order;
  return c;
}

DataStream segment(double increment) {
  return DataStream::with_unit_times(Matrix(2, 1, {0.0, increment}));
}

GridField field(std::vector<double> data, std::size_t t, std::size_t j, std::size_t i) {
  std::vector<double> times(t), lats(j), lons(i);
  for (std::size_t k = 0; k < t; ++k) times[k] = static_cast<double>(k);
  for (std::size_t k = 0; k < j; ++k) lats[k] = -45.0 + 10.0 * static_cast<double>(k);
  for (std::size_t k = 0; k < i; ++k) lons[k] = 30.0 * static_cast<double>(k);
  return {times, lats, lons, std::move(data)};
}

GeneratorContract shift_by_latent(std::size_t k) {
  GeneratorContract g;
  g.window_size = k;
  g.step = [](const Matrix& w, std::span<const double> z) {
    auto last = w.row(w.rows() - 1);
    std::vector<double> next(last.size());
    for (std::size_t c = 0; c < next.size(); ++c) next[c] = last[c] + z[c];
    return next;
  };
  return g;
}

}  // namespace

TEST_CASE("kernel score from Gram terms") {
  const Matrix g(2, 2, {5.0, 0.7, 0.7, 9.0});
  const std::vector<double> obs{0.2, 0.5};
  CHECK(kernel_score_from_gram(g, obs) == doctest::Approx(0.7 - (0.2 + 0.5)));
  const std::vector<double> one{0.2};
  CHECK_THROWS_AS(kernel_score_from_gram(Matrix(1, 1, 1.0), one), Error);
}

TEST_CASE("identical members collapse to minus the self-kernel") {
  gen::Rng rng(5);
  const auto y = augment(gen::walk(rng, 2, 5), kScoringAugmentation);
  const std::vector<DataStream> members(3, y);
  const SigKernelConfig cfg;
  CHECK(kernel_score(members, y, cfg) == doctest::Approx(-goursat_kernel(y, y, cfg)).epsilon(1e-12));
}

TEST_CASE("kernel score is invariant to member order") {
  gen::Rng rng(7);
  const SigKernelConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<DataStream> members;
    for (int m = 0; m < 4; ++m) members.push_back(gen::walk(rng, 2, 4));
    const auto y = gen::walk(rng, 2, 4);
    const double base = kernel_score(members, y, cfg);
    std::vector<std::size_t> perm{0, 1, 2, 3};
    while (std::next_permutation(perm.begin(), perm.end())) {
      std::vector<DataStream> p;
      for (std::size_t i : perm) p.push_back(members[i]);
      CHECK(kernel_score(p, y, cfg) == base);
    }
  }
}

TEST_CASE("kernel distance") {
  gen::Rng rng(9);
  const SigKernelConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = augment(gen::walk(rng, 3, 5), kScoringAugmentation);
    const auto y = augment(gen::walk(rng, 3, 5), kScoringAugmentation);
    CHECK(kernel_distance(x, y, cfg) >= -1e-8);
    CHECK(std::abs(kernel_distance(x, x, cfg)) < 1e-8);
    CHECK(std::abs(kernel_distance(x, y, cfg) - kernel_distance(y, x, cfg)) < 1e-10);
  }
  const double expected = oracle::bessel_series(1.0) + oracle::bessel_series(4.0) -
                          2.0 * oracle::bessel_series(2.0);
  CHECK(kernel_distance(segment(1.0), segment(2.0), linear(5)) == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("latitude weighted score") {
  gen::Rng rng(13);
  const auto obs = field(gen::normals(rng, 4 * 1 * 3), 4, 1, 3);
  std::vector<GridField> members;
  for (int m = 0; m < 3; ++m) members.push_back(field(gen::normals(rng, 12), 4, 1, 3));
  const std::vector<ForecastCase> cases{{members, obs}};
  const std::vector<double> w1{1.0};
  const SigKernelConfig cfg;

  std::vector<DataStream> paths;
  for (const auto& m : members) {
    paths.push_back(augment(latitude_slice_streams(m, {0, 4})[0].second, kScoringAugmentation));
  }
  const auto y = augment(latitude_slice_streams(obs, {0, 4})[0].second, kScoringAugmentation);
  CHECK(lat_weighted_sig_score(cases, w1, SigMode::Score, cfg) == doctest::Approx(kernel_score(paths, y, cfg)));

  const std::vector<ForecastCase> perfect{{{obs}, obs}};
  CHECK(std::abs(lat_weighted_sig_score(perfect, w1, SigMode::Distance, cfg)) < 1e-8);

  const auto obs2 = field(gen::normals(rng, 4 * 3 * 2), 4, 3, 2);
  std::vector<GridField> m2;
  for (int m = 0; m < 2; ++m) m2.push_back(field(gen::normals(rng, 24), 4, 3, 2));
  const std::vector<ForecastCase> c2{{m2, obs2}};
  const std::vector<double> w{0.5, 1.0, 1.5};
  const std::vector<double> w_double{1.0, 2.0, 3.0};
  const double base = lat_weighted_sig_score(c2, w, SigMode::Score, cfg);
  CHECK(lat_weighted_sig_score(c2, w_double, SigMode::Score, cfg) == doctest::Approx(2.0 * base));
  CHECK_THROWS_AS(lat_weighted_sig_score(c2, w1, SigMode::Score, cfg), Error);
  const std::vector<ForecastCase> lonely{{{obs}, obs}};
  CHECK_THROWS_AS(lat_weighted_sig_score(lonely, w1, SigMode::Score, cfg), Error);
}

TEST_CASE("sliding generation") {
  const Matrix window(3, 2, {1, 2, 3, 4, 5, 6});
  GeneratorContract persistence;
  persistence.window_size = 3;
  persistence.step = [](const Matrix& w, std::span<const double>) {
    auto last = w.row(w.rows() - 1);
    return std::vector<double>(last.begin(), last.end());
  };
  const auto latents = LatentPlan::gaussian(2, 4, 2, 1);
  const auto flat = generate_sliding(persistence, window, 4, latents);
  REQUIRE(flat.members.size() == 2);
  for (const auto& m : flat.members) {
    CHECK(m.times()[0] == 1.0);
    CHECK(m.times()[3] == 4.0);
    for (std::size_t u = 0; u < 4; ++u) {
      CHECK(m.point(u)[0] == 5.0);
      CHECK(m.point(u)[1] == 6.0);
    }
  }
  CHECK(flat.members[0] == flat.members[1]);

  const LatentPlan plan(1, 2, 2, {0.5, -1.0, 0.25, 2.0});
  const auto walk = generate_sliding(shift_by_latent(3), window, 2, plan);
  CHECK(walk.members[0].point(0)[0] == 5.5);
  CHECK(walk.members[0].point(1)[0] == 5.75);
  CHECK(walk.members[0].point(1)[1] == 7.0);

  const LatentPlan twins(2, 2, 2, {0.1, 0.2, 0.3, 0.4, 0.1, 0.2, 0.3, 0.4});
  const auto same = generate_sliding(shift_by_latent(3), window, 2, twins);
  CHECK(same.members[0] == same.members[1]);
  const auto diverge = generate_sliding(shift_by_latent(3), window, 2, LatentPlan::gaussian(2, 2, 2, 9));
  CHECK_FALSE(diverge.members[0] == diverge.members[1]);

  CHECK_THROWS_AS(generate_sliding(shift_by_latent(4), window, 2, plan), Error);
}

TEST_CASE("window content when the path is longer than the window") {
  // k = 1 window, l = 3: each step sees only the previous generated value
  std::vector<double> seen;
  GeneratorContract g;
  g.window_size = 1;
  g.step = [&seen](const Matrix& w, std::span<const double>) {
    seen.push_back(w(0, 0));
    return std::vector<double>{w(0, 0) * 2.0};
  };
  generate_sliding(g, Matrix(2, 1, {7.0, 1.0}), 3, LatentPlan(1, 3, 1, {0, 0, 0}));
  CHECK(seen == std::vector<double>{1.0, 2.0, 4.0});
}

TEST_CASE("prequential objective") {
  gen::Rng rng(19);
  const std::size_t k = 2, l = 3, d = 2;
  std::vector<double> data = gen::normals(rng, (k + l) * d);
  const Matrix obs(k + l, d, data);
  const SigKernelConfig cfg;
  PrequentialOptions opt;
  opt.window = k;
  opt.path_len = l;

  // oracle generator replays the realised future; all members agree
  GeneratorContract replay;
  replay.window_size = k;
  replay.step = [&obs](const Matrix& w, std::span<const double>) {
    for (std::size_t t = 0; t + 1 < obs.rows(); ++t) {
      if (obs(t, 0) == w(w.rows() - 1, 0) && obs(t, 1) == w(w.rows() - 1, 1)) {
        return std::vector<double>{obs(t + 1, 0), obs(t + 1, 1)};
      }
    }
    return std::vector<double>{0.0, 0.0};
  };
  const auto latents = LatentPlan::gaussian(3, l, d, 4);
  std::vector<double> y(l), times(l);
  Matrix target(l, d);
  for (std::size_t u = 0; u < l; ++u) {
    times[u] = static_cast<double>(u + 1) / static_cast<double>(l);
    for (std::size_t c = 0; c < d; ++c) target(u, c) = opt.normalization.apply(obs(k + u, c), d);
  }
  const auto yp = augment(DataStream(times, target), opt.augmentation);
  CHECK(prequential_objective(replay, obs, opt, cfg, latents) ==
        doctest::Approx(-goursat_kernel(yp, yp, cfg)).epsilon(1e-12));

  CHECK_THROWS_AS(prequential_objective(replay, Matrix(4, d, 0.0), opt, cfg, latents), Error);
  try {
    prequential_objective(replay, Matrix(4, d, 0.0), opt, cfg, latents);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientHistory);
  }
}

TEST_CASE("patched objective sums per-patch scores") {
  gen::Rng rng(23);
  const Matrix obs(12, 4 * 4, gen::normals(rng, 12 * 16));
  PrequentialOptions opt;
  opt.window = 3;
  opt.path_len = 2;
  const auto g = make_toy_generator(ToyFamily::Ar1, {0.5, 0.8}, 3);
  const auto latents = LatentPlan::gaussian(3, 2, 16, 8);
  const SigKernelConfig cfg;

  double sum = 0.0;
  for (std::size_t lat0 : {0, 2}) {
    for (std::size_t lon0 : {0, 2}) {
      PrequentialOptions one = opt;
      one.patching = PatchSpec{4, 4, {2, 2}, {lat0}, {lon0}};
      sum += prequential_objective(g, obs, one, cfg, latents);
    }
  }
  opt.patching = PatchSpec{4, 4, {2, 2}, {0, 2}, {0, 2}};
  CHECK(prequential_objective(g, obs, opt, cfg, latents) == doctest::Approx(sum).epsilon(1e-12));

  opt.patching = PatchSpec{4, 4, {4, 4}, {0}, {0}};
  PrequentialOptions plain = opt;
  plain.patching.reset();
  CHECK(prequential_objective(g, obs, opt, cfg, latents) ==
        prequential_objective(g, obs, plain, cfg, latents));
}

TEST_CASE("toy fitting") {
  const Matrix obs = simulate_ar1(40, 3, {0.6, 0.5}, 3);
  PrequentialOptions opt;
  opt.window = 2;
  opt.path_len = 3;
  const std::vector<ToyParams> one{{0.6, 0.5}};
  const auto single = fit_toy_generator(ToyFamily::Ar1, obs, opt, 3, {}, one, 1);
  CHECK(single.best == one[0]);
  CHECK(single.objective.size() == 1);

  const std::vector<double> coefs{0.2, 0.6};
  const std::vector<double> noises{0.25, 0.5, 1.0};
  const auto grid = make_param_grid(coefs, noises);
  CHECK(grid.size() == 6);
  CHECK(grid[1] == ToyParams{0.2, 0.5});
  const auto a = fit_toy_generator(ToyFamily::Ar1, obs, opt, 3, {}, grid, 11);
  const auto b = fit_toy_generator(ToyFamily::Ar1, obs, opt, 3, {}, grid, 11);
  CHECK(a.objective.size() == grid.size());
  CHECK(a.objective == b.objective);
  CHECK(a.best == b.best);
  CHECK(a.best_objective == *std::min_element(a.objective.begin(), a.objective.end()));

  CHECK_THROWS_AS(simulate_ar1(10, 1, {1.0, 1.0}, 0), Error);
}
