#include "sigscore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sigscore/errors.hpp"

namespace sigscore {
namespace {

constexpr double kPi = 3.14159265358979323846;

void require_same(FieldView a, FieldView b) {
  if (a.times != b.times || a.lats != b.lats || a.lons != b.lons ||
      a.values.size() != a.times * a.lats * a.lons || b.values.size() != a.values.size()) {
    throw Error(ErrorKind::Shape, "forecast and observation tensors differ in shape");
  }
}

void require_ensemble(EnsembleView f, FieldView o) {
  if (f.members == 0) throw Error(ErrorKind::InsufficientEnsemble, "empty ensemble");
  if (f.times != o.times || f.lats != o.lats || f.lons != o.lons ||
      f.values.size() != f.members * f.times * f.lats * f.lons ||
      o.values.size() != o.times * o.lats * o.lons) {
    throw Error(ErrorKind::Shape, "ensemble and observation tensors differ in shape");
  }
}

void require_weights(const LatWeights& w, std::size_t lats) {
  if (w.size() != lats) {
    throw Error(ErrorKind::Shape, std::to_string(w.size()) + " latitude weights for " +
                                      std::to_string(lats) + " latitude rows");
  }
}

// sum_m |x_m - o| and sum_{m,n} |x_m - x_n| for one cell; `xs` gets sorted.
struct CellCrpsTerms {
  double skill;
  double spread;
};

CellCrpsTerms crps_terms(std::vector<double>& xs, double o) {
  double skill = 0.0;
  for (double x : xs) skill += std::abs(x - o);
  std::sort(xs.begin(), xs.end());
  // sum over ordered pairs of |x_m - x_n| = 2 sum_i (2i - M + 1) x_(i)
  double spread = 0.0;
  const double m = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    spread += (2.0 * static_cast<double>(i) - m + 1.0) * xs[i];
  }
  return {skill, 2.0 * spread};
}

double cell_crps(std::vector<double>& xs, double o) {
  const auto terms = crps_terms(xs, o);
  const double m = static_cast<double>(xs.size());
  return (terms.skill - terms.spread / (2.0 * m)) / m;
}

bool negligible_spread(double sum_sq, std::size_t n, double scale) {
  return std::sqrt(sum_sq / static_cast<double>(n)) <= 1e-12 * std::max(1.0, scale);
}

}  // namespace

LatWeights::LatWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorKind::InvalidArgument, "no latitude weights");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::InvalidArgument, "latitude weights must be positive and finite");
    }
  }
}

LatWeights lat_weights(std::span<const LatBounds> bounds) {
  if (bounds.empty()) throw Error(ErrorKind::InvalidArgument, "no latitude bounds");
  std::vector<double> band(bounds.size());
  double total = 0.0;
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    const auto [lo, hi] = bounds[j];
    if (!(hi > lo) || lo < -90.0 || hi > 90.0) {
      throw Error(ErrorKind::InvalidArgument, "invalid latitude bounds (" + std::to_string(lo) +
                                                  ", " + std::to_string(hi) + ") at row " +
                                                  std::to_string(j));
    }
    band[j] = std::sin(hi * kPi / 180.0) - std::sin(lo * kPi / 180.0);
    total += band[j];
  }
  const double mean = total / static_cast<double>(band.size());
  for (double& b : band) b /= mean;
  return LatWeights(std::move(band));
}

std::size_t CellField::degenerate_count() const {
  return static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
}

std::optional<double> CellField::weighted_mean(const LatWeights& w) const {
  require_weights(w, lats);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < lats; ++j) {
    for (std::size_t i = 0; i < lons; ++i) {
      if (degenerate[j * lons + i]) continue;
      num += w[j] * at(j, i);
      den += w[j];
    }
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

double rmse_lat(FieldView forecast, FieldView obs, const LatWeights& w) {
  require_same(forecast, obs);
  require_weights(w, obs.lats);
  double sum = 0.0;
  for (std::size_t t = 0; t < obs.times; ++t) {
    for (std::size_t j = 0; j < obs.lats; ++j) {
      double row = 0.0;
      for (std::size_t i = 0; i < obs.lons; ++i) {
        const double e = forecast.at(t, j, i) - obs.at(t, j, i);
        row += e * e;
      }
      sum += w[j] * row;
    }
  }
  return std::sqrt(sum / static_cast<double>(obs.values.size()));
}

double nrmse(FieldView forecast, FieldView obs, const LatWeights& w) {
  const double err = rmse_lat(forecast, obs, w);
  const auto [lo, hi] = std::minmax_element(obs.values.begin(), obs.values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) {
    throw Error(ErrorKind::DegenerateStatistics, "observation range is zero");
  }
  return err / range;
}

CellField r2_field(FieldView forecast, FieldView obs) {
  require_same(forecast, obs);
  if (obs.times < 2) throw Error(ErrorKind::InvalidArgument, "R^2 needs at least 2 time samples");
  CellField out{obs.lats, obs.lons, std::vector<double>(obs.lats * obs.lons),
                std::vector<std::uint8_t>(obs.lats * obs.lons, 0)};
  for (std::size_t j = 0; j < obs.lats; ++j) {
    for (std::size_t i = 0; i < obs.lons; ++i) {
      double mean = 0.0;
      double scale = 0.0;
      for (std::size_t t = 0; t < obs.times; ++t) {
        mean += obs.at(t, j, i);
        scale = std::max(scale, std::abs(obs.at(t, j, i)));
      }
      mean /= static_cast<double>(obs.times);
      double ss_res = 0.0;
      double ss_tot = 0.0;
      for (std::size_t t = 0; t < obs.times; ++t) {
        const double r = forecast.at(t, j, i) - obs.at(t, j, i);
        const double c = obs.at(t, j, i) - mean;
        ss_res += r * r;
        ss_tot += c * c;
      }
      const std::size_t cell = j * obs.lons + i;
      if (negligible_spread(ss_tot, obs.times, scale)) {
        out.degenerate[cell] = 1;
        out.values[cell] = std::numeric_limits<double>::quiet_NaN();
      } else {
        out.values[cell] = 1.0 - ss_res / ss_tot;
      }
    }
  }
  return out;
}

double crps_empirical(EnsembleView forecast, FieldView obs, const LatWeights& w) {
  require_ensemble(forecast, obs);
  require_weights(w, obs.lats);
  std::vector<double> xs(forecast.members);
  double total = 0.0;
  for (std::size_t t = 0; t < obs.times; ++t) {
    for (std::size_t j = 0; j < obs.lats; ++j) {
      double row = 0.0;
      for (std::size_t i = 0; i < obs.lons; ++i) {
        for (std::size_t m = 0; m < forecast.members; ++m) xs[m] = forecast.at(m, t, j, i);
        row += cell_crps(xs, obs.at(t, j, i));
      }
      total += w[j] * row;
    }
  }
  return total / static_cast<double>(obs.values.size());
}

CellField crps_field(EnsembleView forecast, FieldView obs) {
  require_ensemble(forecast, obs);
  CellField out{obs.lats, obs.lons, std::vector<double>(obs.lats * obs.lons, 0.0),
                std::vector<std::uint8_t>(obs.lats * obs.lons, 0)};
  std::vector<double> xs(forecast.members);
  for (std::size_t t = 0; t < obs.times; ++t) {
    for (std::size_t j = 0; j < obs.lats; ++j) {
      for (std::size_t i = 0; i < obs.lons; ++i) {
        for (std::size_t m = 0; m < forecast.members; ++m) xs[m] = forecast.at(m, t, j, i);
        out.values[j * obs.lons + i] += cell_crps(xs, obs.at(t, j, i));
      }
    }
  }
  for (double& v : out.values) v /= static_cast<double>(obs.times);
  return out;
}

CellField ncrps_field(EnsembleView forecast, FieldView obs) {
  CellField out = crps_field(forecast, obs);
  for (std::size_t j = 0; j < obs.lats; ++j) {
    for (std::size_t i = 0; i < obs.lons; ++i) {
      double mean = 0.0;
      double scale = 0.0;
      for (std::size_t t = 0; t < obs.times; ++t) {
        mean += obs.at(t, j, i);
        scale = std::max(scale, std::abs(obs.at(t, j, i)));
      }
      mean /= static_cast<double>(obs.times);
      double ss = 0.0;
      for (std::size_t t = 0; t < obs.times; ++t) {
        const double c = obs.at(t, j, i) - mean;
        ss += c * c;
      }
      const std::size_t cell = j * obs.lons + i;
      if (negligible_spread(ss, obs.times, scale)) {
        out.degenerate[cell] = 1;
        out.values[cell] = std::numeric_limits<double>::quiet_NaN();
      } else {
        out.values[cell] /= std::sqrt(ss / static_cast<double>(obs.times));
      }
    }
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::OutOfRange, "probability outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> default_rqe_percentiles(std::size_t count) {
  if (count < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 percentiles");
  std::vector<double> out(count);
  for (std::size_t d = 0; d < count; ++d) {
    const double exponent = -1.0 - 3.0 * static_cast<double>(d) / static_cast<double>(count - 1);
    out[d] = 1.0 - std::pow(10.0, exponent);
  }
  return out;
}

double rqe(std::span<const double> forecast, std::span<const double> obs,
           std::span<const double> percentiles) {
  if (forecast.empty() || obs.empty()) {
    throw Error(ErrorKind::InvalidArgument, "RQE needs non-empty samples");
  }
  std::vector<double> f(forecast.begin(), forecast.end());
  std::vector<double> o(obs.begin(), obs.end());
  std::sort(f.begin(), f.end());
  std::sort(o.begin(), o.end());
  double total = 0.0;
  for (double p : percentiles) {
    const double q_obs = quantile_sorted(o, p);
    if (q_obs == 0.0) {
      throw Error(ErrorKind::UndefinedQuantile,
                  "observation quantile at p = " + std::to_string(p) + " is zero");
    }
    total += (quantile_sorted(f, p) - q_obs) / q_obs;
  }
  return total;
}

std::vector<double> default_credibility_levels() {
  std::vector<double> out(100);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<double>(k + 1) / 100.0;
  return out;
}

double calibration_error(const Matrix& ensemble, std::span<const double> obs,
                         std::span<const double> levels) {
  if (ensemble.rows() < 2) {
    throw Error(ErrorKind::InsufficientEnsemble, "calibration error needs at least 2 members");
  }
  if (ensemble.cols() != obs.size() || obs.empty()) {
    throw Error(ErrorKind::Shape, "ensemble columns must match the observation count");
  }
  if (levels.empty()) throw Error(ErrorKind::InvalidArgument, "no credibility levels");
  const std::size_t n = obs.size();
  std::vector<std::vector<double>> sorted(n, std::vector<double>(ensemble.rows()));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t m = 0; m < ensemble.rows(); ++m) sorted[c][m] = ensemble(m, c);
    std::sort(sorted[c].begin(), sorted[c].end());
  }
  std::vector<double> deviations;
  deviations.reserve(levels.size());
  for (double alpha : levels) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw Error(ErrorKind::OutOfRange, "credibility level outside (0, 1]");
    }
    std::size_t inside = 0;
    for (std::size_t c = 0; c < n; ++c) {
      const double lo = quantile_sorted(sorted[c], (1.0 - alpha) / 2.0);
      const double hi = quantile_sorted(sorted[c], (1.0 + alpha) / 2.0);
      if (obs[c] >= lo && obs[c] <= hi) ++inside;
    }
    const double coverage = static_cast<double>(inside) / static_cast<double>(n);
    deviations.push_back(std::abs(alpha - coverage));
  }
  std::sort(deviations.begin(), deviations.end());
  return quantile_sorted(deviations, 0.5);
}

VariableMetrics compute_variable_metrics(const std::string& name, EnsembleView forecast,
                                         FieldView obs, const LatWeights& w) {
  require_ensemble(forecast, obs);
  VariableMetrics out;
  out.variable = name;

  double rmse_sum = 0.0;
  for (std::size_t m = 0; m < forecast.members; ++m) {
    rmse_sum += rmse_lat(forecast.member(m), obs, w);
  }
  out.rmse = rmse_sum / static_cast<double>(forecast.members);
  const auto [lo, hi] = std::minmax_element(obs.values.begin(), obs.values.end());
  if (*hi > *lo) out.nrmse = out.rmse / (*hi - *lo);

  std::vector<double> mean(obs.values.size(), 0.0);
  for (std::size_t m = 0; m < forecast.members; ++m) {
    auto member = forecast.member(m).values;
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += member[k];
  }
  for (double& v : mean) v /= static_cast<double>(forecast.members);

  std::size_t degenerate = 0;
  if (obs.times >= 2) {
    const CellField r2 = r2_field({obs.times, obs.lats, obs.lons, mean}, obs);
    out.r2 = r2.weighted_mean(w);
    const CellField ncrps = ncrps_field(forecast, obs);
    out.ncrps = ncrps.weighted_mean(w);
    degenerate = r2.degenerate_count();
  }
  out.degenerate_cells = degenerate;
  out.crps = crps_empirical(forecast, obs, w);

  try {
    out.rqe = rqe(forecast.values, obs.values, default_rqe_percentiles());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UndefinedQuantile) throw;
  }

  if (forecast.members >= 2) {
    const std::size_t n = obs.values.size();
    Matrix ens(forecast.members, n, std::vector<double>(forecast.values.begin(), forecast.values.end()));
    out.calibration_error = calibration_error(ens, obs.values, default_credibility_levels());
  }
  return out;
}

}  // namespace sigscore
