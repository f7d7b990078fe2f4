#include "sigscore/grid_data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "sigscore/errors.hpp"

namespace sigscore {
namespace {

int read_int(const std::string& text, std::size_t pos, std::size_t len) {
  int value = 0;
  const char* first = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw Error(ErrorKind::Ingestion, "malformed ISO-8601 timestamp '" + text + "'");
  }
  return value;
}

bool strictly_monotone(std::span<const double> v) {
  if (v.size() < 2) return true;
  const bool up = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (up ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
  }
  return true;
}

void check_finite(const GridVariable& var, std::size_t expected, const char* what) {
  if (var.values.size() != expected) {
    throw Error(ErrorKind::Shape, std::string(what) + " variable '" + var.name + "' holds " +
                                      std::to_string(var.values.size()) + " values, expected " +
                                      std::to_string(expected));
  }
  for (std::size_t k = 0; k < var.values.size(); ++k) {
    if (!std::isfinite(var.values[k])) {
      throw Error(ErrorKind::Ingestion, std::string(what) + " variable '" + var.name +
                                            "' has a non-finite value at flat index " +
                                            std::to_string(k));
    }
  }
}

const GridVariable* find_variable(const std::vector<GridVariable>& vars, const std::string& name) {
  for (const auto& v : vars) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::vector<std::string> names(const std::vector<GridVariable>& vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) out.push_back(v.name);
  return out;
}

void drop_lead(EnsembleForecastGrid& g, std::size_t lead) {
  const std::size_t block = g.members * g.axes.n_lat() * g.axes.n_lon();
  const std::size_t n_lead = g.n_lead();
  for (auto& var : g.variables) {
    std::vector<double> kept;
    kept.reserve(var.values.size() - g.n_init() * block);
    for (std::size_t i = 0; i < g.n_init(); ++i) {
      for (std::size_t l = 0; l < n_lead; ++l) {
        if (l == lead) continue;
        const auto begin = var.values.begin() + static_cast<std::ptrdiff_t>((i * n_lead + l) * block);
        kept.insert(kept.end(), begin, begin + static_cast<std::ptrdiff_t>(block));
      }
    }
    var.values = std::move(kept);
  }
  g.lead_hours.erase(g.lead_hours.begin() + static_cast<std::ptrdiff_t>(lead));
}

std::size_t zero_lead(const EnsembleForecastGrid& g) {
  for (std::size_t l = 0; l < g.n_lead(); ++l) {
    if (g.lead_hours[l] == 0.0) return l;
  }
  return g.n_lead();
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
  std::string s = text;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  if (s.size() != 10 && s.size() != 16 && s.size() != 19) {
    throw Error(ErrorKind::Ingestion, "malformed ISO-8601 timestamp '" + text + "'");
  }
  if (s[4] != '-' || s[7] != '-' ||
      (s.size() > 10 && ((s[10] != 'T' && s[10] != ' ') || s[13] != ':')) ||
      (s.size() == 19 && s[16] != ':')) {
    throw Error(ErrorKind::Ingestion, "malformed ISO-8601 timestamp '" + text + "'");
  }
  const int year = read_int(s, 0, 4);
  const int month = read_int(s, 5, 2);
  const int day = read_int(s, 8, 2);
  const int hour = s.size() > 10 ? read_int(s, 11, 2) : 0;
  const int minute = s.size() > 10 ? read_int(s, 14, 2) : 0;
  const int second = s.size() == 19 ? read_int(s, 17, 2) : 0;
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
    throw Error(ErrorKind::Ingestion, "invalid calendar timestamp '" + text + "'");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

void GridAxes::validate() const {
  if (lat_centers.empty() || lon_centers.empty()) {
    throw Error(ErrorKind::Ingestion, "grid has an empty latitude or longitude axis");
  }
  if (lat_bounds.size() != lat_centers.size()) {
    throw Error(ErrorKind::Ingestion, "latitude bounds count differs from latitude centres");
  }
  if (!strictly_monotone(lat_centers) || !strictly_monotone(lon_centers)) {
    throw Error(ErrorKind::Ingestion, "grid axes must be strictly monotone");
  }
  for (std::size_t j = 0; j < lat_centers.size(); ++j) {
    const auto [lo, hi] = lat_bounds[j];
    const double c = lat_centers[j];
    if (!(lo < hi) || lo < -90.0 || hi > 90.0 || c < lo || c > hi) {
      throw Error(ErrorKind::Ingestion,
                  "invalid latitude bounds at row " + std::to_string(j) + ": [" +
                      std::to_string(lo) + ", " + std::to_string(hi) +
                      "] does not cover centre " + std::to_string(c));
    }
  }
  for (double lon : lon_centers) {
    if (!(lon >= -180.0 && lon < 360.0)) {
      throw Error(ErrorKind::Ingestion, "longitude " + std::to_string(lon) + " outside [-180, 360)");
    }
  }
}

void EnsembleForecastGrid::validate() const {
  axes.validate();
  if (init_times.empty() || lead_hours.empty() || members == 0) {
    throw Error(ErrorKind::Ingestion, "forecast grid has an empty init, lead or member axis");
  }
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < init_times.size(); ++i) {
    const std::int64_t t = parse_iso8601(init_times[i]);
    if (i > 0 && t <= prev) throw Error(ErrorKind::Ingestion, "init times must be increasing");
    prev = t;
  }
  if (!strictly_monotone(lead_hours) ||
      (lead_hours.size() > 1 && lead_hours[1] < lead_hours[0]) || lead_hours.front() < 0.0) {
    throw Error(ErrorKind::Ingestion, "lead hours must be non-negative and increasing");
  }
  if (variables.empty()) throw Error(ErrorKind::Ingestion, "forecast grid has no variables");
  for (const auto& v : variables) check_finite(v, value_count(), "forecast");
}

void ObservationGrid::validate() const {
  axes.validate();
  if (times.empty()) throw Error(ErrorKind::Ingestion, "observation grid has no times");
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::int64_t t = parse_iso8601(times[i]);
    if (i > 0 && t <= prev) throw Error(ErrorKind::Ingestion, "observation times must be increasing");
    prev = t;
  }
  if (variables.empty()) throw Error(ErrorKind::Ingestion, "observation grid has no variables");
  for (const auto& v : variables) check_finite(v, value_count(), "observation");
}

VerificationSet align(const EnsembleForecastGrid& forecast, const ObservationGrid& obs) {
  std::vector<std::string> mismatched;
  if (forecast.axes.lat_centers != obs.axes.lat_centers) mismatched.push_back("lat");
  if (forecast.axes.lat_bounds != obs.axes.lat_bounds) mismatched.push_back("lat_bounds");
  if (forecast.axes.lon_centers != obs.axes.lon_centers) mismatched.push_back("lon");
  if (!mismatched.empty()) {
    std::string list;
    for (const auto& m : mismatched) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::Alignment, "forecast and observation grids differ on axes: " + list);
  }

  std::map<std::int64_t, std::size_t> obs_index;
  for (std::size_t t = 0; t < obs.n_times(); ++t) obs_index[parse_iso8601(obs.times[t])] = t;

  const std::size_t n_init = forecast.n_init();
  const std::size_t n_lead = forecast.n_lead();
  std::vector<std::size_t> rows(n_init * n_lead);
  for (std::size_t i = 0; i < n_init; ++i) {
    const std::int64_t init = parse_iso8601(forecast.init_times[i]);
    for (std::size_t l = 0; l < n_lead; ++l) {
      const auto valid = init + static_cast<std::int64_t>(std::llround(forecast.lead_hours[l] * 3600.0));
      const auto it = obs_index.find(valid);
      if (it == obs_index.end()) {
        throw Error(ErrorKind::Alignment, "no observation at valid time " + format_iso8601(valid) +
                                              " (init " + forecast.init_times[i] + ", lead " +
                                              std::to_string(forecast.lead_hours[l]) + " h)");
      }
      rows[i * n_lead + l] = it->second;
    }
  }

  VerificationSet out;
  out.init_times = forecast.init_times;
  out.lead_hours = forecast.lead_hours;
  out.members = forecast.members;
  out.axes = forecast.axes;
  const std::size_t plane = forecast.axes.n_lat() * forecast.axes.n_lon();
  for (const auto& fv : forecast.variables) {
    const GridVariable* ov = find_variable(obs.variables, fv.name);
    if (ov == nullptr) {
      throw Error(ErrorKind::Alignment, "observations lack variable '" + fv.name + "'");
    }
    AlignedVariable av{fv.name, fv.units, fv.values, {}};
    av.observation.reserve(rows.size() * plane);
    for (std::size_t r : rows) {
      const auto begin = ov->values.begin() + static_cast<std::ptrdiff_t>(r * plane);
      av.observation.insert(av.observation.end(), begin, begin + static_cast<std::ptrdiff_t>(plane));
    }
    out.variables.push_back(std::move(av));
  }
  return out;
}

void harmonize_models(EnsembleForecastGrid& a, EnsembleForecastGrid& b) {
  const std::size_t za = zero_lead(a);
  const std::size_t zb = zero_lead(b);
  const bool a_has = za < a.n_lead();
  const bool b_has = zb < b.n_lead();
  if (a_has && !b_has) drop_lead(a, za);
  if (b_has && !a_has) drop_lead(b, zb);

  std::vector<std::string> mismatched;
  if (a.init_times != b.init_times) mismatched.push_back("init_time");
  if (a.lead_hours != b.lead_hours) mismatched.push_back("lead");
  if (a.axes.lat_centers != b.axes.lat_centers || a.axes.lat_bounds != b.axes.lat_bounds) {
    mismatched.push_back("lat");
  }
  if (a.axes.lon_centers != b.axes.lon_centers) mismatched.push_back("lon");
  if (names(a.variables) != names(b.variables)) mismatched.push_back("variables");
  if (!mismatched.empty()) {
    std::string list;
    for (const auto& m : mismatched) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::Alignment, "models differ on axes: " + list);
  }
}

VerificationSet select_inits(const VerificationSet& set, std::span<const std::size_t> indices) {
  VerificationSet out;
  out.lead_hours = set.lead_hours;
  out.members = set.members;
  out.axes = set.axes;
  const std::size_t plane = set.n_lat() * set.n_lon();
  const std::size_t f_block = set.n_lead() * set.members * plane;
  const std::size_t o_block = set.n_lead() * plane;
  for (std::size_t i : indices) {
    if (i >= set.n_init()) throw Error(ErrorKind::OutOfRange, "init index out of range");
    out.init_times.push_back(set.init_times[i]);
  }
  for (const auto& v : set.variables) {
    AlignedVariable av{v.name, v.units, {}, {}};
    for (std::size_t i : indices) {
      auto fb = v.forecast.begin() + static_cast<std::ptrdiff_t>(i * f_block);
      av.forecast.insert(av.forecast.end(), fb, fb + static_cast<std::ptrdiff_t>(f_block));
      auto ob = v.observation.begin() + static_cast<std::ptrdiff_t>(i * o_block);
      av.observation.insert(av.observation.end(), ob, ob + static_cast<std::ptrdiff_t>(o_block));
    }
    out.variables.push_back(std::move(av));
  }
  return out;
}

}  // namespace sigscore
