#include "sigscore/scoring.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "sigscore/errors.hpp"
#include "sigscore/parallel.hpp"

namespace sigscore {
namespace {

GridField member_mean(const std::vector<GridField>& members) {
  const GridField& first = members.front();
  std::vector<double> mean(first.data().size(), 0.0);
  for (const auto& m : members) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += m.data()[k];
  }
  for (double& v : mean) v /= static_cast<double>(members.size());
  return GridField({first.times().begin(), first.times().end()},
                   {first.lat_centers().begin(), first.lat_centers().end()},
                   {first.lon_centers().begin(), first.lon_centers().end()}, std::move(mean));
}

bool same_layout(const GridField& a, const GridField& b) {
  return a.n_times() == b.n_times() && a.n_lat() == b.n_lat() && a.n_lon() == b.n_lon() &&
         std::equal(a.times().begin(), a.times().end(), b.times().begin());
}

// Values restricted to `columns`, normalised for a path of that width, on
// time stamps u / l (u = 1..l), then augmented.
DataStream encode_path(const Matrix& rows, std::span<const std::size_t> columns,
                       const PrequentialOptions& options) {
  const std::size_t l = rows.rows();
  Matrix values(l, columns.size());
  for (std::size_t u = 0; u < l; ++u) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      values(u, c) = options.normalization.apply(rows(u, columns[c]), columns.size());
    }
  }
  std::vector<double> times(l);
  for (std::size_t u = 0; u < l; ++u) {
    times[u] = static_cast<double>(u + 1) / static_cast<double>(l);
  }
  return augment(DataStream(std::move(times), std::move(values)), options.augmentation);
}

bool stream_less(const DataStream& a, const DataStream& b) {
  const auto ta = a.times();
  const auto tb = b.times();
  if (!std::equal(ta.begin(), ta.end(), tb.begin(), tb.end())) {
    return std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end());
  }
  const auto va = a.values().data();
  const auto vb = b.values().data();
  return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
}

}  // namespace

double kernel_score_from_gram(const Matrix& member_gram, std::span<const double> member_obs) {
  const std::size_t m = member_obs.size();
  if (m < 2) {
    throw Error(ErrorKind::InsufficientEnsemble,
                "unbiased kernel score needs at least 2 members, got " + std::to_string(m));
  }
  if (member_gram.rows() != m || member_gram.cols() != m) {
    throw Error(ErrorKind::Shape, "member Gram must be m x m");
  }
  double spread = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t s = 0; s < m; ++s) {
      if (r != s) spread += member_gram(r, s);
    }
  }
  double closeness = 0.0;
  for (double v : member_obs) closeness += v;
  const double md = static_cast<double>(m);
  return spread / (md * (md - 1.0)) - 2.0 * closeness / md;
}

double kernel_score(std::span<const DataStream> members, const DataStream& obs,
                    const SigKernelConfig& cfg) {
  if (members.size() < 2) {
    throw Error(ErrorKind::InsufficientEnsemble,
                "unbiased kernel score needs at least 2 members, got " +
                    std::to_string(members.size()));
  }
  if (obs.dim() != members.front().dim()) {
    throw Error(ErrorKind::Shape, "observation dimension does not match ensemble members");
  }
  // canonical member order makes the result bitwise independent of input order
  std::vector<const DataStream*> order(members.size());
  for (std::size_t r = 0; r < members.size(); ++r) order[r] = &members[r];
  std::stable_sort(order.begin(), order.end(),
                   [](const DataStream* a, const DataStream* b) { return stream_less(*a, *b); });
  std::vector<DataStream> sorted;
  sorted.reserve(order.size());
  for (const DataStream* p : order) sorted.push_back(*p);
  const GramMatrix spread = gram(sorted, cfg);
  const GramMatrix cross = gram(sorted, std::span<const DataStream>(&obs, 1), cfg);
  return kernel_score_from_gram(spread.entries, cross.entries.data());
}

double kernel_distance(const DataStream& forecast, const DataStream& obs,
                       const SigKernelConfig& cfg) {
  const double kxx = goursat_kernel(forecast, forecast, cfg);
  const double kyy = goursat_kernel(obs, obs, cfg);
  const double kxy = goursat_kernel(forecast, obs, cfg);
  return kxx + kyy - 2.0 * kxy;
}

double lat_weighted_sig_score(std::span<const ForecastCase> cases, std::span<const double> weights,
                              SigMode mode, const SigKernelConfig& cfg,
                              const AugmentationPipeline& augmentation) {
  if (cases.empty()) throw Error(ErrorKind::InvalidArgument, "no forecast cases");
  const std::size_t n_lat = cases.front().observation.n_lat();
  if (weights.size() != n_lat) {
    throw Error(ErrorKind::Shape, "got " + std::to_string(weights.size()) +
                                      " latitude weights for " + std::to_string(n_lat) + " slices");
  }
  for (const auto& c : cases) {
    if (c.members.empty()) throw Error(ErrorKind::InsufficientEnsemble, "case without members");
    if (!same_layout(c.observation, cases.front().observation)) {
      throw Error(ErrorKind::Shape, "forecast cases use different grids");
    }
    for (const auto& m : c.members) {
      if (!same_layout(m, c.observation)) {
        throw Error(ErrorKind::Shape, "member grid differs from observation grid");
      }
    }
    if (mode == SigMode::Score && c.members.size() < 2) {
      throw Error(ErrorKind::InsufficientEnsemble, "score mode needs at least 2 members");
    }
  }
  cfg.validate();

  const IndexRange window{0, cases.front().observation.n_times()};
  const std::size_t n_tasks = cases.size() * n_lat;
  std::vector<double> values(n_tasks, 0.0);
  parallel_for(n_tasks, [&](std::size_t task) {
    const ForecastCase& c = cases[task / n_lat];
    const std::size_t j = task % n_lat;
    auto slice = [&](const GridField& field) {
      return augment(latitude_slice_streams(field, window)[j].second, augmentation);
    };
    const DataStream obs = slice(c.observation);
    if (mode == SigMode::Distance) {
      const DataStream f =
          c.members.size() == 1 ? slice(c.members.front()) : slice(member_mean(c.members));
      values[task] = kernel_distance(f, obs, cfg);
      return;
    }
    std::vector<DataStream> members;
    members.reserve(c.members.size());
    for (const auto& m : c.members) members.push_back(slice(m));
    values[task] = kernel_score(members, obs, cfg);
  });

  // fixed summation order keeps the result independent of scheduling
  double total = 0.0;
  for (std::size_t j = 0; j < n_lat; ++j) {
    double per_slice = 0.0;
    for (std::size_t c = 0; c < cases.size(); ++c) per_slice += values[c * n_lat + j];
    total += weights[j] * per_slice;
  }
  return total;
}

LatentPlan::LatentPlan(std::size_t members, std::size_t length, std::size_t dim,
                       std::vector<double> values)
    : members_(members), length_(length), dim_(dim), values_(std::move(values)) {
  if (values_.size() != members_ * length_ * dim_) {
    throw Error(ErrorKind::Shape, "latent plan size does not match (members, length, dim)");
  }
}

LatentPlan LatentPlan::gaussian(std::size_t members, std::size_t length, std::size_t dim,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(members * length * dim);
  for (double& v : values) v = normal(rng);
  return LatentPlan(members, length, dim, std::move(values));
}

EnsemblePaths generate_sliding(const GeneratorContract& gen, const Matrix& initial_window,
                               std::size_t path_len, const LatentPlan& latents) {
  const std::size_t k = gen.window_size;
  const std::size_t d = initial_window.cols();
  if (k == 0 || !gen.step) throw Error(ErrorKind::InvalidArgument, "generator is not configured");
  if (path_len == 0) throw Error(ErrorKind::InvalidArgument, "path length must be positive");
  if (initial_window.rows() < k) {
    throw Error(ErrorKind::InsufficientHistory, "initial window has " +
                                                    std::to_string(initial_window.rows()) +
                                                    " rows, generator needs " + std::to_string(k));
  }
  if (latents.length() < path_len || latents.members() == 0) {
    throw Error(ErrorKind::Shape, "latent plan does not cover the requested path length");
  }

  std::vector<double> times(path_len);
  for (std::size_t u = 0; u < path_len; ++u) times[u] = static_cast<double>(u + 1);

  EnsemblePaths out;
  out.members.reserve(latents.members());
  for (std::size_t e = 0; e < latents.members(); ++e) {
    // history = last k rows of the initial window, then generated rows
    Matrix history(k + path_len, d);
    const std::size_t offset = initial_window.rows() - k;
    for (std::size_t r = 0; r < k; ++r) {
      auto src = initial_window.row(offset + r);
      std::copy(src.begin(), src.end(), history.row(r).begin());
    }
    Matrix window(k, d);
    for (std::size_t u = 0; u < path_len; ++u) {
      for (std::size_t r = 0; r < k; ++r) {
        auto src = history.row(u + r);
        std::copy(src.begin(), src.end(), window.row(r).begin());
      }
      const std::vector<double> next = gen.step(window, latents.latent(e, u));
      if (next.size() != d) {
        throw Error(ErrorKind::Shape, "generator returned " + std::to_string(next.size()) +
                                          " values, expected " + std::to_string(d));
      }
      std::copy(next.begin(), next.end(), history.row(k + u).begin());
    }
    Matrix path(path_len, d);
    for (std::size_t u = 0; u < path_len; ++u) {
      auto src = history.row(k + u);
      std::copy(src.begin(), src.end(), path.row(u).begin());
    }
    out.members.emplace_back(times, std::move(path));
  }
  return out;
}

double prequential_objective(const GeneratorContract& gen, const Matrix& observations,
                             const PrequentialOptions& options, const SigKernelConfig& cfg,
                             const LatentPlan& latents) {
  const std::size_t k = options.window;
  const std::size_t l = options.path_len;
  const std::size_t T = observations.rows();
  const std::size_t d = observations.cols();
  if (k == 0 || l == 0) throw Error(ErrorKind::InvalidArgument, "window and path length must be positive");
  if (T < k + l) {
    throw Error(ErrorKind::InsufficientHistory, "need at least k + l = " + std::to_string(k + l) +
                                                    " observations, got " + std::to_string(T));
  }
  if (latents.members() < 2) {
    throw Error(ErrorKind::InsufficientEnsemble, "prequential objective needs at least 2 members");
  }
  if (gen.window_size != k) {
    throw Error(ErrorKind::InvalidArgument, "generator window size differs from options.window");
  }
  cfg.validate();

  std::vector<std::vector<std::size_t>> column_sets;
  if (options.patching) {
    const PatchSpec& spec = *options.patching;
    if (spec.n_lat * spec.n_lon != d) {
      throw Error(ErrorKind::Shape, "patch grid does not match observation width");
    }
    for (std::size_t lat0 : spec.lat_starts) {
      for (std::size_t lon0 : spec.lon_starts) {
        column_sets.push_back(patch_indices(spec.n_lat, spec.n_lon, spec.shape, lat0, lon0));
      }
    }
    if (column_sets.empty()) throw Error(ErrorKind::InvalidArgument, "patch spec has no starts");
  } else {
    std::vector<std::size_t> all(d);
    for (std::size_t c = 0; c < d; ++c) all[c] = c;
    column_sets.push_back(std::move(all));
  }

  const std::size_t n_inits = T - l - k + 1;
  std::vector<double> terms(n_inits, 0.0);
  parallel_for(n_inits, [&](std::size_t idx) {
    const std::size_t t = k + idx;
    Matrix window(k, d);
    for (std::size_t r = 0; r < k; ++r) {
      auto src = observations.row(t - k + r);
      std::copy(src.begin(), src.end(), window.row(r).begin());
    }
    Matrix target(l, d);
    for (std::size_t u = 0; u < l; ++u) {
      auto src = observations.row(t + u);
      std::copy(src.begin(), src.end(), target.row(u).begin());
    }
    const EnsemblePaths ensemble = generate_sliding(gen, window, l, latents);
    double term = 0.0;
    for (const auto& cols : column_sets) {
      std::vector<DataStream> members;
      members.reserve(ensemble.members.size());
      for (const auto& m : ensemble.members) members.push_back(encode_path(m.values(), cols, options));
      term += kernel_score(members, encode_path(target, cols, options), cfg);
    }
    terms[idx] = term;
  });

  double total = 0.0;
  for (double v : terms) total += v;
  return total;
}

}  // namespace sigscore
