#include "sigscore/bundle_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sigscore/errors.hpp"

namespace sigscore {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const std::vector<std::string> kForecastDims{"init_time", "lead", "member", "lat", "lon"};
const std::vector<std::string> kObservationDims{"time", "lat", "lon"};

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Ingestion, msg); }

ordered_json read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open manifest " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
}

template <typename T>
T field(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(where + ": '" + key + "' has the wrong type");
  }
}

GridAxes read_axes(const ordered_json& coords) {
  GridAxes axes;
  axes.lat_centers = field<std::vector<double>>(coords, "lat", "coords");
  axes.lon_centers = field<std::vector<double>>(coords, "lon", "coords");
  const auto bounds = field<std::vector<std::vector<double>>>(coords, "lat_bounds", "coords");
  for (const auto& b : bounds) {
    if (b.size() != 2) fail("coords: each lat_bounds entry needs [lower, upper]");
    axes.lat_bounds.push_back({b[0], b[1]});
  }
  return axes;
}

std::vector<double> read_payload(const fs::path& file, std::size_t count, const std::string& var) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail("cannot open data file " + file.string() + " for variable '" + var + "'");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uintmax_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  const std::uintmax_t expected = static_cast<std::uintmax_t>(count) * 4;
  if (size != expected) {
    fail("size mismatch for " + file.string() + ": " + std::to_string(size) +
         " bytes on disk, dims declare " + std::to_string(expected));
  }
  std::vector<std::uint32_t> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected));
  if (!in) fail("short read on " + file.string());
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::uint32_t bits = raw[k];
    if constexpr (std::endian::native == std::endian::big) {
      bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
    }
    float f;
    std::memcpy(&f, &bits, sizeof f);
    out[k] = f;
  }
  return out;
}

void write_payload(const fs::path& file, const std::vector<double>& values) {
  std::vector<std::uint32_t> raw(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto f = static_cast<float>(values[k]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    if constexpr (std::endian::native == std::endian::big) {
      bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
    }
    raw[k] = bits;
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (!out) fail("failed writing " + file.string());
}

// Locates the first non-finite value of a row-major tensor.
void check_finite(const std::vector<double>& values, const std::vector<std::size_t>& dims,
                  const std::vector<std::string>& names, const std::string& var) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::isfinite(values[k])) continue;
    std::vector<std::size_t> idx(dims.size());
    std::size_t rest = k;
    for (std::size_t d = dims.size(); d-- > 0;) {
      idx[d] = rest % dims[d];
      rest /= dims[d];
    }
    std::ostringstream os;
    os << "non-finite value in variable '" << var << "' at (";
    for (std::size_t d = 0; d < dims.size(); ++d) {
      os << (d ? ", " : "") << names[d] << "=" << idx[d];
    }
    os << ")";
    fail(os.str());
  }
}

std::vector<GridVariable> read_variables(const ordered_json& manifest, const fs::path& base,
                                         const std::vector<std::size_t>& dims,
                                         const std::vector<std::string>& names) {
  if (!manifest.contains("variables") || !manifest["variables"].is_array() ||
      manifest["variables"].empty()) {
    fail("manifest lists no variables");
  }
  std::size_t count = 1;
  for (std::size_t d : dims) count *= d;
  std::vector<GridVariable> out;
  for (const auto& v : manifest["variables"]) {
    GridVariable var;
    var.name = field<std::string>(v, "name", "variable");
    var.units = v.value("units", "");
    const std::string where = "variable '" + var.name + "'";
    if (field<std::string>(v, "dtype", where) != "float32") fail(where + ": dtype must be float32");
    if (v.value("byte_order", "little") != "little") fail(where + ": byte_order must be little");
    if (v.value("layout", "row_major") != "row_major") fail(where + ": layout must be row_major");
    var.values = read_payload(base / field<std::string>(v, "file", where), count, var.name);
    check_finite(var.values, dims, names, var.name);
    out.push_back(std::move(var));
  }
  return out;
}

ordered_json axes_json(const GridAxes& axes) {
  ordered_json c;
  c["lat"] = axes.lat_centers;
  ordered_json bounds = ordered_json::array();
  for (const auto& b : axes.lat_bounds) bounds.push_back({b.lower, b.upper});
  c["lat_bounds"] = std::move(bounds);
  c["lon"] = axes.lon_centers;
  return c;
}

void write_common(const fs::path& manifest, ordered_json j, const std::vector<GridVariable>& vars) {
  const fs::path base = manifest.parent_path();
  if (!base.empty()) fs::create_directories(base);
  ordered_json list = ordered_json::array();
  for (const auto& v : vars) {
    const std::string file = manifest.stem().string() + "." + v.name + ".f32";
    list.push_back({{"name", v.name},
                    {"units", v.units},
                    {"file", file},
                    {"dtype", "float32"},
                    {"byte_order", "little"},
                    {"layout", "row_major"}});
    write_payload(base / file, v.values);
  }
  j["variables"] = std::move(list);
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) fail("cannot write " + manifest.string());
  out << j.dump(2) << "\n";
}

}  // namespace

Bundle load_bundle(const fs::path& manifest_path) {
  const ordered_json m = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  const int version = field<int>(m, "schema_version", "manifest");
  if (version != kBundleSchemaVersion) {
    fail("unknown schema_version " + std::to_string(version) + " in " + manifest_path.string());
  }
  const auto kind = field<std::string>(m, "kind", "manifest");
  const auto dims = field<std::vector<std::string>>(m, "dims", "manifest");
  if (!m.contains("coords")) fail("manifest: missing 'coords'");
  const ordered_json& coords = m["coords"];

  if (kind == "forecast") {
    if (dims != kForecastDims) fail("forecast dims must be (init_time, lead, member, lat, lon)");
    EnsembleForecastGrid g;
    g.init_times = field<std::vector<std::string>>(coords, "init_time", "coords");
    g.lead_hours = field<std::vector<double>>(coords, "lead_hours", "coords");
    g.members = field<std::size_t>(coords, "member", "coords");
    g.axes = read_axes(coords);
    g.axes.validate();
    g.variables = read_variables(
        m, base, {g.n_init(), g.n_lead(), g.members, g.axes.n_lat(), g.axes.n_lon()}, dims);
    g.validate();
    return g;
  }
  if (kind == "observation") {
    if (dims != kObservationDims) fail("observation dims must be (time, lat, lon)");
    ObservationGrid g;
    g.times = field<std::vector<std::string>>(coords, "time", "coords");
    g.axes = read_axes(coords);
    g.axes.validate();
    g.variables = read_variables(m, base, {g.n_times(), g.axes.n_lat(), g.axes.n_lon()}, dims);
    g.validate();
    return g;
  }
  fail("manifest kind must be 'forecast' or 'observation', got '" + kind + "'");
}

EnsembleForecastGrid load_forecast_bundle(const fs::path& manifest) {
  auto b = load_bundle(manifest);
  if (auto* g = std::get_if<EnsembleForecastGrid>(&b)) return std::move(*g);
  fail(manifest.string() + " is not a forecast bundle");
}

ObservationGrid load_observation_bundle(const fs::path& manifest) {
  auto b = load_bundle(manifest);
  if (auto* g = std::get_if<ObservationGrid>(&b)) return std::move(*g);
  fail(manifest.string() + " is not an observation bundle");
}

void write_bundle(const fs::path& manifest, const EnsembleForecastGrid& grid) {
  grid.validate();
  ordered_json j;
  j["schema_version"] = kBundleSchemaVersion;
  j["kind"] = "forecast";
  j["dims"] = kForecastDims;
  ordered_json c;
  c["init_time"] = grid.init_times;
  c["lead_hours"] = grid.lead_hours;
  c["member"] = grid.members;
  const ordered_json axes = axes_json(grid.axes);
  for (auto& [k, v] : axes.items()) c[k] = v;
  j["coords"] = std::move(c);
  write_common(manifest, std::move(j), grid.variables);
}

void write_bundle(const fs::path& manifest, const ObservationGrid& grid) {
  grid.validate();
  ordered_json j;
  j["schema_version"] = kBundleSchemaVersion;
  j["kind"] = "observation";
  j["dims"] = kObservationDims;
  ordered_json c;
  c["time"] = grid.times;
  const ordered_json axes = axes_json(grid.axes);
  for (auto& [k, v] : axes.items()) c[k] = v;
  j["coords"] = std::move(c);
  write_common(manifest, std::move(j), grid.variables);
}

}  // namespace sigscore
