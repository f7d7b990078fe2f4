#include "sigscore/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sigscore/errors.hpp"

namespace sigscore {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

void allow_keys(const json& j, const std::string& where, std::set<std::string> keys) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) fail("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key + " has the wrong type");
  }
}

}  // namespace

SigMode parse_sig_mode(const std::string& text) {
  if (text == "score") return SigMode::Score;
  if (text == "distance") return SigMode::Distance;
  fail("unknown signature mode '" + text + "' (score or distance)");
}

StaticKernelKind parse_static_kernel(const std::string& text) {
  if (text == "rbf") return StaticKernelKind::Rbf;
  if (text == "linear") return StaticKernelKind::Linear;
  fail("unknown static kernel '" + text + "' (rbf or linear)");
}

ToyFamily parse_toy_family(const std::string& text) {
  if (text == "ar1") return ToyFamily::Ar1;
  if (text == "persistence") return ToyFamily::PersistenceNoise;
  fail("unknown toy family '" + text + "' (ar1 or persistence)");
}

void RunConfig::validate() const {
  kernel.validate();
  if (!(augmentation.pre_scale > 0.0) || !std::isfinite(augmentation.pre_scale)) {
    fail("augmentation scale must be positive");
  }
  if (path_lengths.min < 2) fail("minimum path length is 2");
  if (path_lengths.max != 0 && path_lengths.max < path_lengths.min) {
    fail("path length max is below min");
  }
  if (regions.empty()) fail("no regions configured");
  if (metrics.empty()) fail("no metrics configured");
  if (!(subsample > 0.0 && subsample <= 1.0)) fail("subsample must lie in (0, 1]");
  if (preq.steps == 0 || preq.n_lat == 0 || preq.n_lon == 0) fail("preq grid must be non-empty");
  if (preq.window == 0 || preq.path_len == 0) fail("preq window and path_len must be positive");
  if (preq.steps < preq.window + preq.path_len) fail("preq steps shorter than window + path_len");
  if (preq.members < 2) fail("preq needs at least 2 members");
  if (preq.coefficients.empty() || preq.noises.empty()) fail("preq parameter grid is empty");
  for (double s : preq.noises) {
    if (!(s > 0.0)) fail("preq noise levels must be positive");
  }
  if (std::abs(preq.truth.coefficient) >= 1.0 && preq.family == ToyFamily::Ar1) {
    fail("preq truth coefficient must satisfy |a| < 1");
  }
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(j, "config",
             {"kernel", "augmentation", "path_lengths", "regions", "metrics", "sig_modes",
              "scorecard_sig_mode", "subsample", "out_dir", "seed", "svg", "preq"});
  RunConfig c;
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    allow_keys(k, "kernel", {"static_kernel", "sigma", "dyadic_order"});
    std::string kind = "rbf";
    read(k, "static_kernel", kind, "kernel");
    c.kernel.static_kernel.kind = parse_static_kernel(kind);
    read(k, "sigma", c.kernel.static_kernel.sigma, "kernel");
    read(k, "dyadic_order", c.kernel.dyadic_order, "kernel");
  }
  if (j.contains("augmentation")) {
    const json& a = j["augmentation"];
    allow_keys(a, "augmentation", {"basepoint", "time", "lead_lag", "scale"});
    read(a, "basepoint", c.augmentation.use_basepoint, "augmentation");
    read(a, "time", c.augmentation.use_time, "augmentation");
    read(a, "lead_lag", c.augmentation.use_lead_lag, "augmentation");
    read(a, "scale", c.augmentation.pre_scale, "augmentation");
  }
  if (j.contains("path_lengths")) {
    const json& p = j["path_lengths"];
    allow_keys(p, "path_lengths", {"min", "max"});
    read(p, "min", c.path_lengths.min, "path_lengths");
    read(p, "max", c.path_lengths.max, "path_lengths");
  }
  if (j.contains("regions")) {
    std::vector<std::string> names;
    read(j, "regions", names, "config");
    c.regions.clear();
    for (const auto& n : names) c.regions.push_back(parse_region(n));
  }
  if (j.contains("metrics")) {
    std::vector<std::string> names;
    read(j, "metrics", names, "config");
    c.metrics.clear();
    for (const auto& n : names) c.metrics.push_back(parse_metric(n));
  }
  if (j.contains("sig_modes")) {
    std::vector<std::string> names;
    read(j, "sig_modes", names, "config");
    c.sig_modes.clear();
    for (const auto& n : names) c.sig_modes.push_back(parse_sig_mode(n));
  }
  if (j.contains("scorecard_sig_mode")) {
    std::string mode;
    read(j, "scorecard_sig_mode", mode, "config");
    c.scorecard_sig_mode = parse_sig_mode(mode);
  }
  read(j, "subsample", c.subsample, "config");
  if (j.contains("out_dir")) {
    std::string dir;
    read(j, "out_dir", dir, "config");
    c.out_dir = dir;
  }
  read(j, "seed", c.seed, "config");
  read(j, "svg", c.svg, "config");
  if (j.contains("preq")) {
    const json& p = j["preq"];
    allow_keys(p, "preq",
               {"family", "coefficient", "noise", "steps", "lat", "lon", "window", "path_len",
                "members", "coefficients", "noises"});
    std::string family = "ar1";
    read(p, "family", family, "preq");
    c.preq.family = parse_toy_family(family);
    read(p, "coefficient", c.preq.truth.coefficient, "preq");
    read(p, "noise", c.preq.truth.noise, "preq");
    read(p, "steps", c.preq.steps, "preq");
    read(p, "lat", c.preq.n_lat, "preq");
    read(p, "lon", c.preq.n_lon, "preq");
    read(p, "window", c.preq.window, "preq");
    read(p, "path_len", c.preq.path_len, "preq");
    read(p, "members", c.preq.members, "preq");
    read(p, "coefficients", c.preq.coefficients, "preq");
    read(p, "noises", c.preq.noises, "preq");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace sigscore
