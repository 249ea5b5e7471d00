#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "etpa/config.hpp"
#include "etpa/fitkit.hpp"
#include "etpa/io.hpp"
#include "etpa/mc.hpp"
#include "etpa/models.hpp"
#include "etpa/simkit.hpp"
#include "etpa/version.hpp"

// Command-line orchestration. Exit codes: 0 success, 2 validation/usage
// error, 3 non-convergence.

namespace etpa::cli {

namespace detail {

struct LoadedConfig {
  config::ExperimentConfig cfg;
  std::uint64_t hash = 0;
  std::uint64_t seed = 0;
};

inline LoadedConfig load(const std::string& config_path,
                         std::optional<std::uint64_t> seed_override) {
  nlohmann::json user = nlohmann::json::object();
  LoadedConfig loaded;
  if (!config_path.empty()) {
    loaded.cfg = config::load_config(config_path);
    std::ifstream in(config_path);
    user = nlohmann::json::parse(in);
  } else {
    loaded.cfg = config::default_config();
  }
  loaded.hash = config::config_hash(user);
  loaded.seed = seed_override.value_or(loaded.cfg.seed);
  return loaded;
}

inline const optics::GaussianBeam& beam_for_model(
    const config::ExperimentConfig& cfg, fitkit::ProfileModel model) {
  switch (model) {
    case fitkit::ProfileModel::spa: return cfg.beam("pump_532");
    case fitkit::ProfileModel::tpa: return cfg.beam("laser_1064");
    case fitkit::ProfileModel::etpa: return cfg.beam("spdc_1064");
  }
  throw std::invalid_argument("unknown profile model");
}

inline std::vector<double> make_grid(double z_min, double z_max, double step) {
  if (!(step > 0.0)) throw std::domain_error("step must be > 0");
  if (!(z_max > z_min)) throw std::domain_error("z-max must exceed z-min");
  const auto n = static_cast<long long>(std::llround((z_max - z_min) / step));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 1);
  for (long long i = 0; i <= n; ++i) grid.push_back(z_min + step * i);
  return grid;
}

inline models::AxialProfile profile_for(const config::ExperimentConfig& cfg,
                                        fitkit::ProfileModel model,
                                        std::span<const double> grid) {
  const auto& beam = beam_for_model(cfg, model);
  switch (model) {
    case fitkit::ProfileModel::spa:
      return models::zscan_profile_spa(beam, cfg.detector, cfg.sample,
                                       cfg.formula_mode, grid);
    case fitkit::ProfileModel::tpa:
      return models::zscan_profile_tpa(beam, cfg.detector, cfg.sample,
                                       cfg.formula_mode, grid);
    case fitkit::ProfileModel::etpa:
      return models::zscan_profile_etpa(beam, cfg.detector, cfg.sample,
                                        cfg.formula_mode, grid);
  }
  throw std::invalid_argument("unknown profile model");
}

inline fitkit::FreeParams parse_free(const std::vector<std::string>& names) {
  fitkit::FreeParams free;
  for (const auto& n : names) {
    if (n == "d") free.d = true;
    else if (n == "w0") free.w0 = true;
    else if (n == "wd") free.wd = true;
    else throw std::invalid_argument("--free accepts d, w0, wd (got '" + n + "')");
  }
  return free;
}

/// Peak of |rate| used for normalization; zero for an all-zero series.
inline double series_peak(const simkit::CorrectedSeries& s) {
  double peak = 0.0;
  for (const auto& p : s.points) peak = std::max(peak, std::abs(p.rate));
  return peak;
}

}  // namespace detail

inline int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Forward models and inverse analysis for classical and "
               "entangled two-photon-absorption Z-scan experiments"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  int exit_code = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON")
        ->envname("ETPA_ZSCAN_CONFIG");
    cmd->add_option("--seed", seed_override, "override the config seed");
  };

  // ------------------------------------------------------------- simulate
  auto* simulate = app.add_subcommand("simulate", "generate synthetic data");
  simulate->require_subcommand(1);

  struct {
    std::string mode;
    std::vector<double> factors{0.2, 0.35, 0.5, 0.65, 0.8, 1.0};
    double signal_rate = 15.0;
    double exposure_s = 2e4;
    bool noiseless = false;
    std::string out;
  } att;
  auto* sim_att = simulate->add_subcommand(
      "attenuation", "pump- or pair-attenuation count series");
  sim_att->add_option("--mode", att.mode, "pump|pair")
      ->required()
      ->check(CLI::IsMember({"pump", "pair"}));
  sim_att->add_option("--factors", att.factors, "attenuation factors in [0,1]")
      ->delimiter(',');
  sim_att->add_option("--signal-rate", att.signal_rate,
                      "signal rate at factor 1, counts/s");
  sim_att->add_option("--exposure", att.exposure_s, "integration time per point, s");
  sim_att->add_flag("--noiseless", att.noiseless,
                    "use rounded expectations instead of Poisson draws");
  sim_att->add_option("--out", att.out, "output CSV")->required();
  add_common(sim_att);
  sim_att->callback([&] {
    const auto loaded = detail::load(config_path, seed_override);
    const auto series = simkit::simulate_attenuation_series(
        att.mode == "pump" ? simkit::AttenuationMode::pump
                           : simkit::AttenuationMode::pair,
        att.factors, att.signal_rate, loaded.cfg.noise, att.exposure_s,
        loaded.seed,
        att.noiseless ? simkit::Sampling::expectation
                      : simkit::Sampling::poisson);
    io::write_count_series_csv(att.out, series,
                               io::make_provenance(loaded.hash, loaded.seed));
  });

  struct {
    std::string model;
    double z_min = -300.0, z_max = 300.0, step = 10.0;
    int repeats = 100;
    double peak_rate = 15.0;
    double exposure_s = 1.0;
    bool noiseless = false;
    std::string out;
  } zs;
  auto* sim_zscan = simulate->add_subcommand("zscan", "stage-scanned Z-series");
  sim_zscan->add_option("--model", zs.model, "spa|tpa|etpa")
      ->required()
      ->check(CLI::IsMember({"spa", "tpa", "etpa"}));
  sim_zscan->add_option("--z-min", zs.z_min, "first stage position, um");
  sim_zscan->add_option("--z-max", zs.z_max, "last stage position, um");
  sim_zscan->add_option("--step", zs.step, "displacement interval, um");
  sim_zscan->add_option("--repeats", zs.repeats, "measurements per position");
  sim_zscan->add_option("--peak-rate", zs.peak_rate, "signal rate at focus, counts/s");
  sim_zscan->add_option("--exposure", zs.exposure_s, "time per measurement, s");
  sim_zscan->add_flag("--noiseless", zs.noiseless,
                      "use rounded expectations instead of Poisson draws");
  sim_zscan->add_option("--out", zs.out, "output CSV")->required();
  add_common(sim_zscan);
  sim_zscan->callback([&] {
    const auto loaded = detail::load(config_path, seed_override);
    const auto grid = detail::make_grid(zs.z_min, zs.z_max, zs.step);
    const auto profile = detail::profile_for(
        loaded.cfg, fitkit::profile_model_from_string(zs.model), grid);
    const auto series = simkit::simulate_zscan(
        profile, zs.peak_rate, loaded.cfg.noise, zs.exposure_s, zs.repeats,
        loaded.seed,
        zs.noiseless ? simkit::Sampling::expectation
                     : simkit::Sampling::poisson);
    io::write_count_series_csv(zs.out, series,
                               io::make_provenance(loaded.hash, loaded.seed));
  });

  // ------------------------------------------------------------------ fit
  auto* fit = app.add_subcommand("fit", "fit measured or synthetic series");
  fit->require_subcommand(1);

  struct {
    std::string input, out;
  } fatt;
  auto* fit_att = fit->add_subcommand(
      "attenuation", "linear and quadratic laws on a corrected series");
  fit_att->add_option("input", fatt.input, "count-series CSV")->required();
  fit_att->add_option("--out", fatt.out, "output JSON")->required();
  add_common(fit_att);
  fit_att->callback([&] {
    const auto loaded = detail::load(config_path, seed_override);
    const auto series = io::read_count_series_csv(fatt.input);
    const auto corrected = simkit::correct_counts(series, loaded.cfg.noise);
    const auto pts = fitkit::normalized_points(corrected);
    const auto linear = fitkit::fit_linear(pts);
    const auto quadratic = fitkit::fit_quadratic(pts);
    nlohmann::json out{
        {"kind", simkit::to_string(series.kind)},
        {"normalization", detail::series_peak(corrected)},
        {"linear", io::fit_result_to_json(linear)},
        {"quadratic", io::fit_result_to_json(quadratic)},
        {"provenance", io::make_provenance(loaded.hash, loaded.seed)}};
    io::write_json(fatt.out, out);
  });

  struct {
    std::string input, model, out;
    std::vector<std::string> free{"d", "w0", "wd"};
  } fzs;
  auto* fit_zscan_cmd = fit->add_subcommand("zscan", "axial profile model fit");
  fit_zscan_cmd->add_option("input", fzs.input, "count-series CSV")->required();
  fit_zscan_cmd->add_option("--model", fzs.model, "spa|tpa|etpa")
      ->required()
      ->check(CLI::IsMember({"spa", "tpa", "etpa"}));
  fit_zscan_cmd->add_option("--free", fzs.free, "free parameters among d,w0,wd")
      ->delimiter(',');
  fit_zscan_cmd->add_option("--out", fzs.out, "output JSON")->required();
  add_common(fit_zscan_cmd);
  fit_zscan_cmd->callback([&] {
    const auto loaded = detail::load(config_path, seed_override);
    const auto series = io::read_count_series_csv(fzs.input);
    const auto corrected = simkit::correct_counts(series, loaded.cfg.noise);
    const auto pts = fitkit::normalized_points(corrected);
    const auto model = fitkit::profile_model_from_string(fzs.model);
    const fitkit::ZscanGeometry geometry{
        detail::beam_for_model(loaded.cfg, model), loaded.cfg.detector,
        loaded.cfg.sample.half_thickness_d_um};
    const auto result =
        fitkit::fit_zscan(pts, model, geometry, detail::parse_free(fzs.free),
                          loaded.cfg.formula_mode);
    nlohmann::json out = io::fit_result_to_json(result);
    out["provenance"] = io::make_provenance(loaded.hash, loaded.seed);
    out["provenance"]["normalization"] = detail::series_peak(corrected);
    io::write_json(fzs.out, out);
    if (!result.converged) exit_code = 3;
  });

  // ------------------------------------------------------------- classify
  struct {
    std::string pump_csv, pair_csv, out;
    double ratio_threshold = 0.8;
  } cls;
  auto* classify = app.add_subcommand(
      "classify", "linear-vs-quadratic signature verdict for a series pair");
  classify->add_option("pump", cls.pump_csv, "pump-attenuation CSV")->required();
  classify->add_option("pair", cls.pair_csv, "pair-attenuation CSV")->required();
  classify->add_option("--ratio-threshold", cls.ratio_threshold,
                       "RMSE ratio needed to call a law");
  classify->add_option("--out", cls.out, "output JSON")->required();
  add_common(classify);
  classify->callback([&] {
    const auto loaded = detail::load(config_path, seed_override);
    const auto pump = simkit::correct_counts(
        io::read_count_series_csv(cls.pump_csv), loaded.cfg.noise);
    const auto pair = simkit::correct_counts(
        io::read_count_series_csv(cls.pair_csv), loaded.cfg.noise);
    const auto verdicts =
        fitkit::classify_signature(pump, pair, cls.ratio_threshold);
    nlohmann::json out{
        {"pump", io::verdict_to_json(verdicts.first)},
        {"pair", io::verdict_to_json(verdicts.second)},
        {"etpa_confirmed", fitkit::etpa_confirmed(verdicts)},
        {"provenance", io::make_provenance(loaded.hash, loaded.seed)}};
    io::write_json(cls.out, out);
  });

  // --------------------------------------------------------------- report
  auto* report = app.add_subcommand("report", "derived-quantity reports");
  report->require_subcommand(1);

  struct {
    std::string fit_json, out;
    double collection_efficiency = 1.0;
  } xs;
  auto* xsec = report->add_subcommand(
      "cross-section", "ETPA cross-section from a pump-attenuation fit");
  xsec->add_option("fit", xs.fit_json, "fit attenuation output JSON")->required();
  xsec->add_option("--collection-efficiency", xs.collection_efficiency,
                   "detected fraction of absorption events, in (0, 1]");
  xsec->add_option("--out", xs.out, "output JSON")->required();
  add_common(xsec);
  xsec->callback([&] {
    const auto loaded = detail::load(config_path, seed_override);
    const auto fit_json = io::read_json(xs.fit_json);
    if (fit_json.at("kind").get<std::string>() != "pump_attenuation")
      throw std::domain_error(
          "cross-section needs a pump-attenuation fit (linear in pair rate)");
    const auto linear = io::fit_result_from_json(fit_json.at("linear"));
    const double slope_per_factor = linear.parameters.at("a").value *
                                    fit_json.at("normalization").get<double>();
    const double max_pair_rate = loaded.cfg.source.max_pair_rate();
    const double slope_per_pair_rate = slope_per_factor / max_pair_rate;
    const auto report_out = fitkit::estimate_cross_section(
        slope_per_pair_rate, xs.collection_efficiency, loaded.cfg.sample,
        loaded.cfg.beam("spdc_1064"));
    nlohmann::json out = io::cross_section_report_to_json(report_out);
    out["inputs"] = {{"slope_counts_per_pair_rate", slope_per_pair_rate},
                     {"slope_counts_per_factor", slope_per_factor},
                     {"collection_efficiency", xs.collection_efficiency},
                     {"max_pair_rate_per_s", max_pair_rate}};
    out["provenance"] = io::make_provenance(loaded.hash, loaded.seed);
    io::write_json(xs.out, out);
  });

  // -------------------------------------------------------------- profile
  struct {
    std::string model, out;
    double z_min = -300.0, z_max = 300.0, step = 1.0;
  } prof;
  auto* profile = app.add_subcommand("profile", "plot-ready normalized profile");
  profile->add_option("--model", prof.model, "spa|tpa|etpa")
      ->required()
      ->check(CLI::IsMember({"spa", "tpa", "etpa"}));
  profile->add_option("--z-min", prof.z_min, "first position, um");
  profile->add_option("--z-max", prof.z_max, "last position, um");
  profile->add_option("--step", prof.step, "grid step, um");
  profile->add_option("--out", prof.out, "output CSV")->required();
  add_common(profile);
  profile->callback([&] {
    const auto loaded = detail::load(config_path, seed_override);
    const auto grid = detail::make_grid(prof.z_min, prof.z_max, prof.step);
    const auto p = detail::profile_for(
        loaded.cfg, fitkit::profile_model_from_string(prof.model), grid);
    io::write_profile_csv(prof.out, p,
                          io::make_provenance(loaded.hash, loaded.seed));
  });

  // ---------------------------------------------------------------- parse
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(kToolName);
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}

}  // namespace etpa::cli
