#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "etpa/config.hpp"
#include "etpa/io.hpp"
#include "etpa/simkit.hpp"

using namespace etpa;
using Catch::Matchers::WithinRel;

namespace {

std::filesystem::path temp_dir() {
  const auto dir =
      std::filesystem::temp_directory_path() / "etpa_config_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("defaults carry the reference experiment", "[config]") {
  const auto cfg = config::default_config();
  REQUIRE_THAT(cfg.sample.concentration_per_cm3, WithinRel(3.01107038e18, 1e-9));
  REQUIRE(cfg.sample.half_thickness_d_um == 63.0);
  REQUIRE(cfg.noise.dark_rate_per_s == 200.0);
  REQUIRE(cfg.noise.background_rate_per_s == 10.0);
  REQUIRE(cfg.formula_mode == optics::FormulaMode::corrected);
  REQUIRE(cfg.beam("pump_532").waist_w0_um == 4.4);
  REQUIRE(cfg.beam("laser_1064").waist_w0_um == 1.5);
  REQUIRE(cfg.beam("spdc_1064").waist_w0_um == 4.5);
  REQUIRE_THAT(cfg.source.max_pair_rate(), WithinRel(8.7e11, 1e-12));
  REQUIRE_THAT(cfg.correlation.sigma_corr_um, WithinRel(65.35326855990796, 1e-12));
}

TEST_CASE("shipped default config matches built-in defaults", "[config]") {
  const auto path =
      std::filesystem::path(ETPA_REPO_ROOT) / "configs" / "default.json";
  const auto from_file = config::load_config(path);
  const auto built_in = config::default_config();
  REQUIRE(from_file.sample.concentration_per_cm3 ==
          built_in.sample.concentration_per_cm3);
  REQUIRE(from_file.beam("spdc_1064").waist_w0_um ==
          built_in.beam("spdc_1064").waist_w0_um);
  REQUIRE(from_file.source.pairs_per_mw == built_in.source.pairs_per_mw);
  REQUIRE(from_file.noise.dark_rate_per_s == built_in.noise.dark_rate_per_s);
  REQUIRE(from_file.seed == built_in.seed);
}

TEST_CASE("invariant violations report the JSON pointer", "[config]") {
  nlohmann::json bad = {
      {"beams", {{"spdc_1064", {{"numerical_aperture", 1.5}}}}}};
  try {
    config::config_from_json(bad);
    FAIL("expected ConfigError");
  } catch (const config::ConfigError& e) {
    REQUIRE(e.pointer() == "/beams/spdc_1064/numerical_aperture");
  }
}

TEST_CASE("omitting a section fills the documented defaults", "[config]") {
  const auto cfg = config::config_from_json(
      nlohmann::json{{"sample", {{"concentration_mM", 2.0}}}});
  REQUIRE(cfg.noise.dark_rate_per_s == 200.0);
  REQUIRE(cfg.noise.background_rate_per_s == 10.0);
  REQUIRE_THAT(cfg.sample.concentration_per_cm3,
               WithinRel(2.0 * 6.02214076e17, 1e-12));
  REQUIRE(cfg.sample.half_thickness_d_um == 63.0);  // untouched default
}

TEST_CASE("unknown keys are rejected with their pointer", "[config]") {
  nlohmann::json bad = {{"sample", {{"concentration_nM", 5.0}}}};
  try {
    config::config_from_json(bad);
    FAIL("expected ConfigError");
  } catch (const config::ConfigError& e) {
    REQUIRE(e.pointer() == "/sample/concentration_nM");
  }
}

TEST_CASE("type mismatches are rejected", "[config]") {
  REQUIRE_THROWS_AS(config::config_from_json(nlohmann::json{
                        {"detector", {{"radius_wd_um", "250"}}}}),
                    config::ConfigError);
  REQUIRE_THROWS_AS(
      config::config_from_json(nlohmann::json{{"noise", 5}}),
      config::ConfigError);
  REQUIRE_THROWS_AS(
      config::config_from_json(nlohmann::json{{"formula_mode", "verbatim"}}),
      config::ConfigError);
}

TEST_CASE("missing file and malformed JSON fail cleanly", "[config]") {
  REQUIRE_THROWS_AS(config::load_config("/nonexistent/nowhere.json"),
                    config::ConfigError);
  const auto path = temp_dir() / "broken.json";
  std::ofstream(path) << "{ not json";
  REQUIRE_THROWS_WITH(config::load_config(path),
                      Catch::Matchers::ContainsSubstring("parse error"));
}

TEST_CASE("config hash is stable and sensitive", "[config]") {
  const auto a = config::config_hash(nlohmann::json::object());
  const auto b = config::config_hash(nlohmann::json::object());
  REQUIRE(a == b);
  const auto c =
      config::config_hash(nlohmann::json{{"seed", 1}});
  REQUIRE(a != c);
}

TEST_CASE("doubles survive the CSV format round trip", "[config]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 50; ++i) {
    const double v = u(rng);
    REQUIRE(io::parse_double(io::format_double(v), "test") == v);
  }
  for (double v : {0.0, 1e-300, 1e300, 0.1, 2e4}) {
    REQUIRE(io::parse_double(io::format_double(v), "test") == v);
  }
}

TEST_CASE("count series CSV round trip", "[config]") {
  const simkit::NoiseModel noise{200.0, 10.0};
  const std::vector<double> factors{0.2, 0.5, 1.0};
  const auto series = simkit::simulate_attenuation_series(
      simkit::AttenuationMode::pair, factors, 15.0, noise, 2e4, 42);
  const auto path = temp_dir() / "series.csv";
  io::write_count_series_csv(path, series, io::make_provenance(0x1234, 42));

  const auto back = io::read_count_series_csv(path);
  REQUIRE(back.kind == series.kind);
  REQUIRE(back.seed == series.seed);
  REQUIRE(back.records.size() == series.records.size());
  for (std::size_t i = 0; i < series.records.size(); ++i) {
    REQUIRE(back.records[i].x == series.records[i].x);
    REQUIRE(back.records[i].counts == series.records[i].counts);
    REQUIRE(back.records[i].exposure_s == series.records[i].exposure_s);
    REQUIRE(back.records[i].dark_counts == series.records[i].dark_counts);
  }
  REQUIRE(back.provenance.at("mode") == "pair");
}

TEST_CASE("identical inputs write identical bytes", "[config]") {
  const simkit::NoiseModel noise{200.0, 10.0};
  const std::vector<double> factors{0.25, 0.75};
  const auto series = simkit::simulate_attenuation_series(
      simkit::AttenuationMode::pump, factors, 15.0, noise, 2e4, 7);
  const auto p1 = temp_dir() / "a.csv";
  const auto p2 = temp_dir() / "b.csv";
  io::write_count_series_csv(p1, series, io::make_provenance(0xabc, 7));
  io::write_count_series_csv(p2, series, io::make_provenance(0xabc, 7));
  REQUIRE(slurp(p1) == slurp(p2));
}

TEST_CASE("fit result JSON round trip keeps the fixed field names", "[config]") {
  fitkit::FitResult fit;
  fit.model_id = "linear";
  fit.parameters["a"] = {3.5, 0.01};
  fit.r_squared = 0.997;
  fit.rmse = 0.12;
  fit.converged = true;
  fit.iterations = 0;
  fit.residuals = {0.1, -0.1};
  const auto j = io::fit_result_to_json(fit);
  REQUIRE(j.contains("model_id"));
  REQUIRE(j.contains("params"));
  REQUIRE(j["params"]["a"]["value"] == 3.5);
  REQUIRE(j.contains("r_squared"));
  REQUIRE(j.contains("rmse"));
  REQUIRE(j.contains("converged"));
  REQUIRE(j.contains("iterations"));
  const auto back = io::fit_result_from_json(j);
  REQUIRE(back.model_id == fit.model_id);
  REQUIRE(back.parameters.at("a").value == 3.5);
  REQUIRE(back.parameters.at("a").sigma == 0.01);
  REQUIRE(back.rmse == fit.rmse);
  REQUIRE(back.residuals == fit.residuals);
}

TEST_CASE("malformed CSV is rejected", "[config]") {
  const auto path = temp_dir() / "malformed.csv";
  std::ofstream(path) << "x,counts\n1,2\n";
  REQUIRE_THROWS_AS(io::read_count_series_csv(path), io::IoError);
}
