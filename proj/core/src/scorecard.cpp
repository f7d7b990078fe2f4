#include "sigscore/scorecard.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sigscore/errors.hpp"

namespace sigscore {
namespace {

using nlohmann::ordered_json;

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

double parse_degrees(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorKind::Config, "bad latitude '" + text + "' in region specification");
  }
  return value;
}

LatWeights region_weights(const GridAxes& axes, std::span<const std::size_t> rows) {
  std::vector<LatBounds> bounds;
  for (std::size_t j : rows) bounds.push_back(axes.lat_bounds[j]);
  return lat_weights(bounds);
}

// (member, lat, lon) planes for one (init, lead), restricted to `rows`.
std::vector<double> gather_members(const VerificationSet& set, std::size_t v, std::size_t init,
                                   std::size_t lead, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(set.members * rows.size() * set.n_lon());
  for (std::size_t m = 0; m < set.members; ++m) {
    for (std::size_t j : rows) {
      for (std::size_t i = 0; i < set.n_lon(); ++i) out.push_back(set.forecast(v, init, lead, m, j, i));
    }
  }
  return out;
}

std::vector<double> gather_obs(const VerificationSet& set, std::size_t v, std::size_t init,
                               std::size_t lead, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size() * set.n_lon());
  for (std::size_t j : rows) {
    for (std::size_t i = 0; i < set.n_lon(); ++i) out.push_back(set.observation(v, init, lead, j, i));
  }
  return out;
}

double weighted_mse(std::span<const double> f, std::span<const double> o, const LatWeights& w,
                    std::size_t n_lon) {
  double sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i < n_lon; ++i) {
      const double e = f[j * n_lon + i] - o[j * n_lon + i];
      row += e * e;
    }
    sum += w[j] * row;
  }
  return sum / static_cast<double>(o.size());
}

void check_same_inputs(const VerificationSet& a, const VerificationSet& b) {
  std::vector<std::string> mismatched;
  if (a.init_times != b.init_times) mismatched.push_back("init_time");
  if (a.lead_hours != b.lead_hours) mismatched.push_back("lead");
  if (a.axes.lat_centers != b.axes.lat_centers || a.axes.lat_bounds != b.axes.lat_bounds) {
    mismatched.push_back("lat");
  }
  if (a.axes.lon_centers != b.axes.lon_centers) mismatched.push_back("lon");
  bool same_vars = a.variables.size() == b.variables.size();
  bool same_obs = same_vars;
  for (std::size_t v = 0; same_vars && v < a.variables.size(); ++v) {
    same_vars = a.variables[v].name == b.variables[v].name;
    same_obs = same_obs && a.variables[v].observation == b.variables[v].observation;
  }
  if (!same_vars) mismatched.push_back("variables");
  if (same_vars && mismatched.empty() && !same_obs) mismatched.push_back("observations");
  if (!mismatched.empty()) {
    std::string list;
    for (const auto& m : mismatched) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::Alignment, "target and baseline differ on axes: " + list);
  }
}

std::string mode_name(SigMode mode) { return mode == SigMode::Score ? "score" : "distance"; }

ordered_json number_or_null(double x) {
  return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr);
}

ordered_json optional_number(const std::optional<double>& x) {
  return x ? number_or_null(*x) : ordered_json(nullptr);
}

std::string optional_field(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string diverging_color(double v) {
  v = std::clamp(std::isfinite(v) ? v : 0.0, -1.0, 1.0);
  // white at 0, blue for positive, red for negative
  const double r0 = v >= 0 ? 33 : 178;
  const double g0 = v >= 0 ? 102 : 24;
  const double b0 = v >= 0 ? 172 : 43;
  const double t = std::abs(v);
  auto mix = [t](double c) { return static_cast<int>(std::lround(255.0 + t * (c - 255.0))); };
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(r0), mix(g0), mix(b0));
  return buf;
}

}  // namespace

bool Region::contains(double lat) const {
  if (kind == RegionKind::NorthernHemisphere) return lat >= lower && lat <= upper;
  return lat >= lower && lat < upper;
}

Region Region::northern_hemisphere() { return {RegionKind::NorthernHemisphere, "NH", 20.0, 90.0}; }
Region Region::tropics() { return {RegionKind::Tropics, "TR", -20.0, 20.0}; }
Region Region::southern_hemisphere() {
  return {RegionKind::SouthernHemisphere, "SH", -90.0, -20.0};
}

Region Region::custom(double lower, double upper) {
  if (!(lower < upper) || lower < -90.0 || upper > 90.0) {
    throw Error(ErrorKind::Config, "custom region needs -90 <= lower < upper <= 90");
  }
  return {RegionKind::Custom, format_number(lower) + ":" + format_number(upper), lower, upper};
}

Region parse_region(const std::string& text) {
  const std::string key = upper(text);
  if (key == "NH") return Region::northern_hemisphere();
  if (key == "TR" || key == "TROPICS") return Region::tropics();
  if (key == "SH") return Region::southern_hemisphere();
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorKind::Config, "unknown region '" + text + "' (use NH, TR, SH or lo:hi)");
  }
  return Region::custom(parse_degrees(text.substr(0, colon)), parse_degrees(text.substr(colon + 1)));
}

std::vector<Region> standard_regions() {
  return {Region::northern_hemisphere(), Region::tropics(), Region::southern_hemisphere()};
}

std::vector<std::size_t> region_rows(const GridAxes& axes, const Region& region) {
  std::vector<std::size_t> rows;
  for (std::size_t j = 0; j < axes.n_lat(); ++j) {
    if (region.contains(axes.lat_centers[j])) rows.push_back(j);
  }
  if (rows.empty()) {
    throw Error(ErrorKind::EmptyRegion, "region " + region.name + " contains no latitude rows");
  }
  return rows;
}

ScoreMetric parse_metric(const std::string& text) {
  const std::string key = upper(text);
  if (key == "RMSE") return ScoreMetric::Rmse;
  if (key == "MSE") return ScoreMetric::Mse;
  if (key == "CRPS") return ScoreMetric::Crps;
  if (key == "ENSMSE") return ScoreMetric::EnsMse;
  if (key == "SIGK") return ScoreMetric::Sigk;
  throw Error(ErrorKind::UnsupportedMetric, "metric '" + text + "' is not supported");
}

std::string to_string(ScoreMetric metric) {
  switch (metric) {
    case ScoreMetric::Rmse: return "RMSE";
    case ScoreMetric::Mse: return "MSE";
    case ScoreMetric::Crps: return "CRPS";
    case ScoreMetric::EnsMse: return "ENSMSE";
    case ScoreMetric::Sigk: return "SIGK";
  }
  return "?";
}

Orientation orientation(ScoreMetric) { return Orientation::LowerBetter; }

double raw_normalized_difference(double target, double baseline, Orientation o) {
  const double s = o == Orientation::LowerBetter ? 1.0 : -1.0;
  return s * (baseline - target) / std::max(std::abs(baseline), 1e-12);
}

double normalized_difference(double target, double baseline, Orientation o) {
  return std::clamp(raw_normalized_difference(target, baseline, o), -1.0, 1.0);
}

std::vector<std::size_t> subsample_indices(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::Config, "subsample fraction must lie in (0, 1]");
  }
  if (n == 0) return {};
  auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, n);
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = i * n / count;
  return out;
}

ObservationStats observation_stats(const VerificationSet& set, std::size_t v) {
  const auto& obs = set.variables.at(v).observation;
  if (obs.empty()) throw Error(ErrorKind::DegenerateStatistics, "no observations");
  double mean = 0.0;
  for (double x : obs) mean += x;
  mean /= static_cast<double>(obs.size());
  double ss = 0.0;
  for (double x : obs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(obs.size()));
  if (!(sd > 0.0)) {
    throw Error(ErrorKind::DegenerateStatistics,
                "observations of '" + set.variables[v].name + "' have zero standard deviation");
  }
  return {mean, sd};
}

std::vector<AxisValue> sigk_by_pathlength(const VerificationSet& set, std::size_t v,
                                          const Region& region, const SigkOptions& options,
                                          const ObservationStats& stats) {
  const std::size_t n_lead = set.n_lead();
  if (n_lead < 3) throw Error(ErrorKind::PathTooShort, "SIGK needs at least 3 leads");
  const std::size_t k_max = options.path_lengths.max == 0 ? n_lead - 1 : options.path_lengths.max;
  const std::size_t k_min = options.path_lengths.min;
  if (k_min < 2 || k_max > n_lead - 1 || k_min > k_max) {
    throw Error(ErrorKind::Config, "path lengths must satisfy 2 <= min <= max <= leads - 1");
  }
  if (!(stats.std > 0.0)) throw Error(ErrorKind::DegenerateStatistics, "non-positive std");
  const auto rows = region_rows(set.axes, region);
  const LatWeights w = region_weights(set.axes, rows);
  std::vector<double> lats;
  for (std::size_t j : rows) lats.push_back(set.axes.lat_centers[j]);
  const std::size_t n_lon = set.n_lon();
  const KernelNormalization norm{stats.mean, stats.std, true};

  std::vector<AxisValue> out;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    std::vector<double> times(k + 1);
    for (std::size_t u = 0; u <= k; ++u) {
      times[u] = static_cast<double>(u) / static_cast<double>(n_lead - 1);
    }
    std::vector<ForecastCase> cases;
    cases.reserve(set.n_init());
    for (std::size_t init = 0; init < set.n_init(); ++init) {
      ForecastCase c;
      std::vector<double> obs;
      for (std::size_t u = 0; u <= k; ++u) {
        for (std::size_t j : rows) {
          for (std::size_t i = 0; i < n_lon; ++i) {
            obs.push_back(norm.apply(set.observation(v, init, u, j, i), n_lon));
          }
        }
      }
      c.observation = GridField(times, lats, set.axes.lon_centers, std::move(obs));
      for (std::size_t m = 0; m < set.members; ++m) {
        std::vector<double> data;
        for (std::size_t u = 0; u <= k; ++u) {
          for (std::size_t j : rows) {
            for (std::size_t i = 0; i < n_lon; ++i) {
              data.push_back(norm.apply(set.forecast(v, init, u, m, j, i), n_lon));
            }
          }
        }
        c.members.emplace_back(times, lats, set.axes.lon_centers, std::move(data));
      }
      cases.push_back(std::move(c));
    }
    const double total = lat_weighted_sig_score(cases, w.values(), options.mode, options.kernel,
                                                options.augmentation);
    out.push_back({k, total / static_cast<double>(set.n_init())});
  }
  return out;
}

std::vector<AxisValue> classical_by_lead(const VerificationSet& set, std::size_t v,
                                         const Region& region, ScoreMetric metric) {
  if (metric == ScoreMetric::Sigk) {
    throw Error(ErrorKind::UnsupportedMetric, "SIGK is scored by path length, not by lead");
  }
  const auto rows = region_rows(set.axes, region);
  const LatWeights w = region_weights(set.axes, rows);
  const std::size_t n_lon = set.n_lon();
  const std::size_t plane = rows.size() * n_lon;

  std::vector<AxisValue> out;
  for (std::size_t lead = 0; lead < set.n_lead(); ++lead) {
    double acc = 0.0;
    for (std::size_t init = 0; init < set.n_init(); ++init) {
      const auto f = gather_members(set, v, init, lead, rows);
      const auto o = gather_obs(set, v, init, lead, rows);
      const std::span<const double> fs(f);
      switch (metric) {
        case ScoreMetric::Rmse:
        case ScoreMetric::Mse: {
          double s = 0.0;
          for (std::size_t m = 0; m < set.members; ++m) {
            const double mse = weighted_mse(fs.subspan(m * plane, plane), o, w, n_lon);
            s += metric == ScoreMetric::Rmse ? std::sqrt(mse) : mse;
          }
          acc += s / static_cast<double>(set.members);
          break;
        }
        case ScoreMetric::EnsMse: {
          std::vector<double> mean(plane, 0.0);
          for (std::size_t m = 0; m < set.members; ++m) {
            for (std::size_t c = 0; c < plane; ++c) mean[c] += f[m * plane + c];
          }
          for (double& x : mean) x /= static_cast<double>(set.members);
          acc += weighted_mse(mean, o, w, n_lon);
          break;
        }
        case ScoreMetric::Crps:
          acc += crps_empirical({set.members, 1, rows.size(), n_lon, f}, {1, rows.size(), n_lon, o}, w);
          break;
        case ScoreMetric::Sigk:
          break;
      }
    }
    out.push_back({lead + 1, acc / static_cast<double>(set.n_init())});
  }
  return out;
}

Scorecard build_scorecard(const VerificationSet& target, const VerificationSet& baseline,
                          const ScorecardOptions& options) {
  check_same_inputs(target, baseline);
  if (options.regions.empty() || options.metrics.empty()) {
    throw Error(ErrorKind::Config, "scorecard needs at least one region and one metric");
  }
  Scorecard card;
  card.target_name = options.target_name;
  card.baseline_name = options.baseline_name;
  card.init_times = target.init_times;
  for (std::size_t v = 0; v < target.variables.size(); ++v) {
    std::optional<ObservationStats> stats;
    for (const Region& region : options.regions) {
      for (ScoreMetric metric : options.metrics) {
        std::vector<AxisValue> t;
        std::vector<AxisValue> b;
        if (metric == ScoreMetric::Sigk) {
          if (!stats) stats = observation_stats(target, v);
          t = sigk_by_pathlength(target, v, region, options.sigk, *stats);
          b = sigk_by_pathlength(baseline, v, region, options.sigk, *stats);
        } else {
          t = classical_by_lead(target, v, region, metric);
          b = classical_by_lead(baseline, v, region, metric);
        }
        for (std::size_t a = 0; a < t.size(); ++a) {
          card.cells.push_back({target.variables[v].name, region.name, to_string(metric), t[a].axis,
                                t[a].value, b[a].value,
                                normalized_difference(t[a].value, b[a].value, orientation(metric))});
        }
      }
    }
  }
  return card;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string scorecard_csv(const Scorecard& card) {
  std::ostringstream os;
  os << "variable,region,metric,axis,target,baseline,normalized_diff\n";
  for (const auto& c : card.cells) {
    os << c.variable << ',' << c.region << ',' << c.metric << ',' << c.axis << ','
       << format_number(c.target) << ',' << format_number(c.baseline) << ','
       << format_number(c.normalized_diff) << '\n';
  }
  return os.str();
}

std::string scorecard_json(const Scorecard& card) {
  ordered_json j;
  j["target"] = card.target_name;
  j["baseline"] = card.baseline_name;
  ordered_json inits = ordered_json::object();
  inits["count"] = card.init_times.size();
  inits["first"] = card.init_times.empty() ? "" : card.init_times.front();
  inits["last"] = card.init_times.empty() ? "" : card.init_times.back();
  j["init_times"] = inits;
  ordered_json cells = ordered_json::array();
  for (const auto& c : card.cells) {
    ordered_json cell;
    cell["variable"] = c.variable;
    cell["region"] = c.region;
    cell["metric"] = c.metric;
    cell["axis"] = c.axis;
    cell["target"] = number_or_null(c.target);
    cell["baseline"] = number_or_null(c.baseline);
    cell["normalized_diff"] = number_or_null(c.normalized_diff);
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

std::string scorecard_svg(const Scorecard& card) {
  constexpr int kCellW = 26;
  constexpr int kCellH = 20;
  constexpr int kLabelW = 70;
  constexpr int kTitleH = 22;
  constexpr int kGap = 18;

  // panels keyed by (variable, region) in first-seen order
  std::vector<std::pair<std::string, std::string>> panels;
  for (const auto& c : card.cells) {
    const std::pair key{c.variable, c.region};
    if (std::find(panels.begin(), panels.end(), key) == panels.end()) panels.push_back(key);
  }

  struct Layout {
    std::vector<std::string> metrics;
    std::vector<std::size_t> axes;
  };
  std::vector<Layout> layouts;
  int width = 0;
  int height = kGap;
  for (const auto& [var, reg] : panels) {
    Layout l;
    for (const auto& c : card.cells) {
      if (c.variable != var || c.region != reg) continue;
      if (std::find(l.metrics.begin(), l.metrics.end(), c.metric) == l.metrics.end()) {
        l.metrics.push_back(c.metric);
      }
      if (std::find(l.axes.begin(), l.axes.end(), c.axis) == l.axes.end()) l.axes.push_back(c.axis);
    }
    std::sort(l.axes.begin(), l.axes.end());
    width = std::max(width, kLabelW + static_cast<int>(l.axes.size()) * kCellW + kGap);
    height += kTitleH + static_cast<int>(l.metrics.size() + 1) * kCellH + kGap;
    layouts.push_back(std::move(l));
  }

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  int y = kGap;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& [var, reg] = panels[p];
    const Layout& l = layouts[p];
    os << "<text x=\"4\" y=\"" << y + 14 << "\" font-size=\"12\">" << xml_escape(var) << " / "
       << xml_escape(reg) << "</text>\n";
    y += kTitleH;
    for (std::size_t r = 0; r < l.metrics.size(); ++r) {
      const int row_y = y + static_cast<int>(r) * kCellH;
      os << "<text x=\"4\" y=\"" << row_y + 14 << "\">" << xml_escape(l.metrics[r]) << "</text>\n";
      for (const auto& c : card.cells) {
        if (c.variable != var || c.region != reg || c.metric != l.metrics[r]) continue;
        const auto col = std::find(l.axes.begin(), l.axes.end(), c.axis) - l.axes.begin();
        os << "<rect x=\"" << kLabelW + col * kCellW << "\" y=\"" << row_y << "\" width=\""
           << kCellW - 1 << "\" height=\"" << kCellH - 1 << "\" fill=\""
           << diverging_color(c.normalized_diff) << "\"><title>" << format_number(c.normalized_diff)
           << "</title></rect>\n";
      }
    }
    const int axis_y = y + static_cast<int>(l.metrics.size()) * kCellH;
    for (std::size_t a = 0; a < l.axes.size(); ++a) {
      os << "<text x=\"" << kLabelW + static_cast<int>(a) * kCellW + 4 << "\" y=\"" << axis_y + 14
         << "\">" << l.axes[a] << "</text>\n";
    }
    y = axis_y + kCellH + kGap;
  }
  os << "</svg>\n";
  return os.str();
}

EvaluationReport evaluate(const VerificationSet& set, const EvaluationOptions& options) {
  EvaluationReport report;
  const std::size_t n_time = set.n_init() * set.n_lead();
  const std::size_t plane = set.n_lat() * set.n_lon();
  const LatWeights w = lat_weights(set.axes.lat_bounds);
  for (std::size_t v = 0; v < set.variables.size(); ++v) {
    // (init, lead, member, ...) -> (member, init * lead, ...)
    std::vector<double> ens(set.members * n_time * plane);
    for (std::size_t t = 0; t < n_time; ++t) {
      for (std::size_t m = 0; m < set.members; ++m) {
        const auto src = set.variables[v].forecast.begin() +
                         static_cast<std::ptrdiff_t>((t * set.members + m) * plane);
        std::copy(src, src + static_cast<std::ptrdiff_t>(plane),
                  ens.begin() + static_cast<std::ptrdiff_t>((m * n_time + t) * plane));
      }
    }
    const EnsembleView fv{set.members, n_time, set.n_lat(), set.n_lon(), ens};
    const FieldView ov{n_time, set.n_lat(), set.n_lon(), set.variables[v].observation};
    report.metrics.variables.push_back(compute_variable_metrics(set.variables[v].name, fv, ov, w));

    if (options.sig_modes.empty()) continue;
    const ObservationStats stats = observation_stats(set, v);
    for (const Region& region : options.regions) {
      for (SigMode mode : options.sig_modes) {
        SigkOptions so = options.sigk;
        so.mode = mode;
        for (const auto& [k, value] : sigk_by_pathlength(set, v, region, so, stats)) {
          report.sigk.push_back({set.variables[v].name, region.name, mode_name(mode), k, value});
        }
      }
    }
  }
  return report;
}

std::string metrics_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "variable,rmse,nrmse,r2,crps,ncrps,rqe,calibration_error,degenerate_cells\n";
  for (const auto& m : report.metrics.variables) {
    os << m.variable << ',' << format_number(m.rmse) << ',' << optional_field(m.nrmse) << ','
       << optional_field(m.r2) << ',' << format_number(m.crps) << ',' << optional_field(m.ncrps)
       << ',' << optional_field(m.rqe) << ',' << optional_field(m.calibration_error) << ','
       << m.degenerate_cells << '\n';
  }
  return os.str();
}

std::string sigk_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "variable,region,mode,path_length,value\n";
  for (const auto& r : report.sigk) {
    os << r.variable << ',' << r.region << ',' << r.mode << ',' << r.path_length << ','
       << format_number(r.value) << '\n';
  }
  return os.str();
}

std::string evaluation_json(const EvaluationReport& report) {
  ordered_json j;
  ordered_json vars = ordered_json::array();
  for (const auto& m : report.metrics.variables) {
    ordered_json e;
    e["variable"] = m.variable;
    e["rmse"] = number_or_null(m.rmse);
    e["nrmse"] = optional_number(m.nrmse);
    e["r2"] = optional_number(m.r2);
    e["crps"] = number_or_null(m.crps);
    e["ncrps"] = optional_number(m.ncrps);
    e["rqe"] = optional_number(m.rqe);
    e["calibration_error"] = optional_number(m.calibration_error);
    e["degenerate_cells"] = m.degenerate_cells;
    vars.push_back(std::move(e));
  }
  j["metrics"] = std::move(vars);
  ordered_json sigk = ordered_json::array();
  for (const auto& r : report.sigk) {
    sigk.push_back({{"variable", r.variable},
                    {"region", r.region},
                    {"mode", r.mode},
                    {"path_length", r.path_length},
                    {"value", number_or_null(r.value)}});
  }
  j["sigk"] = std::move(sigk);
  return j.dump(2) + "\n";
}

}  // namespace sigscore
