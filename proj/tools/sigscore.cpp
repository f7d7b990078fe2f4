#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "selftest.hpp"
#include "sigscore/bundle_io.hpp"
#include "sigscore/errors.hpp"
#include "sigscore/run_config.hpp"
#include "sigscore/scorecard.hpp"
#include "sigscore/synthetic.hpp"
#include "sigscore/toy_models.hpp"

namespace fs = std::filesystem;
using namespace sigscore;

namespace {

// Flags shared by the compute subcommands; unset options keep config values.
struct Overrides {
  std::string config;
  std::string out_dir;
  std::string regions;
  std::string metrics;
  std::string path_lengths;
  std::optional<std::size_t> dyadic_order;
  std::optional<double> sigma;
  std::optional<std::string> kernel;
  std::optional<double> subsample;
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t parse_size(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorKind::Config, "invalid " + what + " '" + text + "'");
  }
  return v;
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (!o.regions.empty()) {
    cfg.regions.clear();
    for (const auto& r : split(o.regions, ',')) cfg.regions.push_back(parse_region(r));
  }
  if (!o.metrics.empty()) {
    cfg.metrics.clear();
    for (const auto& m : split(o.metrics, ',')) cfg.metrics.push_back(parse_metric(m));
  }
  if (!o.path_lengths.empty()) {
    const auto colon = o.path_lengths.find(':');
    if (colon == std::string::npos) {
      cfg.path_lengths.min = cfg.path_lengths.max = parse_size(o.path_lengths, "path length");
    } else {
      cfg.path_lengths.min = parse_size(o.path_lengths.substr(0, colon), "path length");
      cfg.path_lengths.max = parse_size(o.path_lengths.substr(colon + 1), "path length");
    }
  }
  if (o.dyadic_order) cfg.kernel.dyadic_order = *o.dyadic_order;
  if (o.sigma) cfg.kernel.static_kernel.sigma = *o.sigma;
  if (o.kernel) cfg.kernel.static_kernel.kind = parse_static_kernel(*o.kernel);
  if (o.subsample) cfg.subsample = *o.subsample;
  if (o.seed) cfg.seed = *o.seed;
  if (o.svg) cfg.svg = true;
  try {
    cfg.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, e.what());
  }
  return cfg;
}

SigkOptions sigk_options(const RunConfig& cfg) {
  SigkOptions s;
  s.kernel = cfg.kernel;
  s.mode = cfg.scorecard_sig_mode;
  s.augmentation = cfg.augmentation;
  s.path_lengths = cfg.path_lengths;
  return s;
}

VerificationSet subsample(const VerificationSet& set, double fraction) {
  if (fraction >= 1.0) return set;
  return select_inits(set, subsample_indices(set.n_init(), fraction));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--out-dir", o.out_dir, "Output directory");
  app->add_option("--regions", o.regions, "Comma-separated regions: NH, TR, SH or lo:hi");
  app->add_option("--path-lengths", o.path_lengths, "Path lengths as k or min:max");
  app->add_option("--dyadic-order", o.dyadic_order, "PDE grid refinement");
  app->add_option("--sigma", o.sigma, "RBF bandwidth");
  app->add_option("--kernel", o.kernel, "Static kernel")->check(CLI::IsMember({"rbf", "linear"}));
  app->add_option("--subsample", o.subsample, "Fraction of init times to keep");
  app->add_option("--seed", o.seed, "Random seed");
}

int run_evaluate(const std::string& manifest, const std::string& obs_manifest, const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  const auto fc = load_forecast_bundle(manifest);
  const auto obs = load_observation_bundle(obs_manifest);
  const auto set = subsample(align(fc, obs), cfg.subsample);

  EvaluationOptions opt;
  opt.regions = cfg.regions;
  opt.sigk = sigk_options(cfg);
  opt.sig_modes = cfg.sig_modes;
  const auto report = evaluate(set, opt);

  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "metrics.csv", metrics_csv(report));
  write_text(cfg.out_dir / "sigk.csv", sigk_csv(report));
  write_text(cfg.out_dir / "evaluation.json", evaluation_json(report));
  std::cout << "wrote " << (cfg.out_dir / "metrics.csv").string() << ", sigk.csv, evaluation.json\n";
  return 0;
}

int run_scorecard(const std::string& target_manifest, const std::string& baseline_manifest,
                  const std::string& obs_manifest, const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  auto target = load_forecast_bundle(target_manifest);
  auto baseline = load_forecast_bundle(baseline_manifest);
  const auto obs = load_observation_bundle(obs_manifest);
  harmonize_models(target, baseline);
  const auto t = subsample(align(target, obs), cfg.subsample);
  const auto b = subsample(align(baseline, obs), cfg.subsample);

  ScorecardOptions opt;
  opt.regions = cfg.regions;
  opt.metrics = cfg.metrics;
  opt.sigk = sigk_options(cfg);
  opt.target_name = fs::path(target_manifest).stem().string();
  opt.baseline_name = fs::path(baseline_manifest).stem().string();
  const auto card = build_scorecard(t, b, opt);

  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "scorecard.csv", scorecard_csv(card));
  write_text(cfg.out_dir / "scorecard.json", scorecard_json(card));
  if (cfg.svg) write_text(cfg.out_dir / "scorecard.svg", scorecard_svg(card));
  std::size_t wins = 0;
  for (const auto& c : card.cells) wins += c.normalized_diff > 0.0;
  std::cout << card.cells.size() << " cells, " << wins << " favour " << card.target_name << "\n";
  return 0;
}

int run_preq_demo(const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  const PreqDemoConfig& p = cfg.preq;
  const std::size_t d = p.n_lat * p.n_lon;
  const Matrix data = simulate_ar1(p.steps, d, p.truth, cfg.seed);

  double mean = 0.0;
  for (double v : data.data()) mean += v;
  mean /= static_cast<double>(data.data().size());
  double var = 0.0;
  for (double v : data.data()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(data.data().size()));

  PrequentialOptions options;
  options.window = p.window;
  options.path_len = p.path_len;
  options.augmentation = cfg.augmentation;
  options.normalization = {mean, sd, true};
  options.patching = PatchSpec{p.n_lat, p.n_lon, {p.n_lat, p.n_lon}, {0}, {0}};

  const auto grid = make_param_grid(p.coefficients, p.noises);
  const ToyFit fit =
      fit_toy_generator(p.family, data, options, p.members, cfg.kernel, grid, cfg.seed + 1);

  fs::create_directories(cfg.out_dir);
  std::string trace = "coefficient,noise,objective\n";
  for (std::size_t i = 0; i < fit.grid.size(); ++i) {
    trace += format_number(fit.grid[i].coefficient) + "," + format_number(fit.grid[i].noise) + "," +
             format_number(fit.objective[i]) + "\n";
  }
  write_text(cfg.out_dir / "preq_trace.csv", trace);

  nlohmann::ordered_json result;
  result["family"] = std::string(to_string(p.family));
  result["truth"] = {{"coefficient", p.truth.coefficient}, {"noise", p.truth.noise}};
  result["recovered"] = {{"coefficient", fit.best.coefficient}, {"noise", fit.best.noise}};
  result["objective"] = fit.best_objective;
  result["seed"] = cfg.seed;
  write_text(cfg.out_dir / "preq_result.json", result.dump(2) + "\n");

  std::cout << "recovered coefficient " << format_number(fit.best.coefficient) << ", noise "
            << format_number(fit.best.noise) << " (truth " << format_number(p.truth.coefficient)
            << ", " << format_number(p.truth.noise) << ")\n";
  return 0;
}

int run_synth(const fs::path& out_dir, const SyntheticSpec& spec, double target_noise,
              double baseline_noise, std::uint64_t seed) {
  const auto obs = make_synthetic_observations(spec, seed);
  write_bundle(out_dir / "obs.json", obs);
  write_bundle(out_dir / "target.json", make_noisy_forecast(spec, obs, target_noise, seed + 1));
  write_bundle(out_dir / "baseline.json", make_noisy_forecast(spec, obs, baseline_noise, seed + 2));
  std::cout << "wrote obs.json, target.json, baseline.json to " << out_dir.string() << "\n";
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Ingestion:
    case ErrorKind::Alignment:
      return 2;
    case ErrorKind::Config:
    case ErrorKind::UnsupportedMetric:
      return 3;
    case ErrorKind::NumericalInstability:
      return 4;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature kernel scoring and forecast verification"};
  app.require_subcommand(1);

  Overrides eval_o;
  std::string eval_manifest, eval_obs;
  auto* eval = app.add_subcommand("evaluate", "Metric suite and SIGK tables for one model");
  eval->add_option("--manifest", eval_manifest, "Forecast bundle manifest")->required();
  eval->add_option("--obs-manifest", eval_obs, "Observation bundle manifest")->required();
  add_common(eval, eval_o);

  Overrides card_o;
  std::string card_target, card_baseline, card_obs;
  auto* card = app.add_subcommand("scorecard", "Compare a target model against a baseline");
  card->add_option("--manifest", card_target, "Target forecast bundle manifest")->required();
  card->add_option("--baseline-manifest", card_baseline, "Baseline forecast bundle manifest")
      ->required();
  card->add_option("--obs-manifest", card_obs, "Observation bundle manifest")->required();
  card->add_option("--metrics", card_o.metrics, "Comma-separated metrics: RMSE, MSE, CRPS, ENSMSE, SIGK");
  card->add_flag("--svg", card_o.svg, "Also write scorecard.svg");
  add_common(card, card_o);

  Overrides preq_o;
  auto* preq = app.add_subcommand("preq-demo", "Fit a toy generator with the prequential objective");
  preq->add_option("--config", preq_o.config, "JSON run configuration")->check(CLI::ExistingFile);
  preq->add_option("--out-dir", preq_o.out_dir, "Output directory");
  preq->add_option("--dyadic-order", preq_o.dyadic_order, "PDE grid refinement");
  preq->add_option("--sigma", preq_o.sigma, "RBF bandwidth");
  preq->add_option("--kernel", preq_o.kernel, "Static kernel")->check(CLI::IsMember({"rbf", "linear"}));
  preq->add_option("--seed", preq_o.seed, "Random seed");

  auto* self = app.add_subcommand("selftest", "Run the built-in agreement checks");

  SyntheticSpec synth_spec;
  std::string synth_dir = "sigscore-synth";
  double target_noise = 0.5;
  double baseline_noise = 1.0;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Write synthetic observation and forecast bundles");
  synth->add_option("--out-dir", synth_dir, "Output directory");
  synth->add_option("--lat", synth_spec.n_lat, "Latitude bands");
  synth->add_option("--lon", synth_spec.n_lon, "Longitudes");
  synth->add_option("--inits", synth_spec.n_init, "Init times");
  synth->add_option("--leads", synth_spec.n_lead, "Lead times");
  synth->add_option("--members", synth_spec.members, "Ensemble members");
  synth->add_option("--target-noise", target_noise, "Target model noise level");
  synth->add_option("--baseline-noise", baseline_noise, "Baseline model noise level");
  synth->add_option("--seed", synth_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*eval) return run_evaluate(eval_manifest, eval_obs, eval_o);
    if (*card) return run_scorecard(card_target, card_baseline, card_obs, card_o);
    if (*preq) return run_preq_demo(preq_o);
    if (*self) return cli::run_selftest(std::cout) ? 0 : 1;
    if (*synth) return run_synth(synth_dir, synth_spec, target_noise, baseline_noise, synth_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
