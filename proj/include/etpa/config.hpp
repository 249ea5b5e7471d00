#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "etpa/models.hpp"
#include "etpa/optics.hpp"
#include "etpa/simkit.hpp"
#include "etpa/spdc.hpp"

// Experiment configuration: JSON with explicit unit-suffixed keys, defaults
// taken from the reference experiment. Unknown keys are rejected so a wrong
// unit suffix fails loudly instead of being ignored.

namespace etpa::config {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct ExperimentConfig {
  spdc::SpdcSource source;
  spdc::TransverseCorrelation correlation =
      spdc::TransverseCorrelation::calibrated_default();
  std::map<std::string, optics::GaussianBeam> beams;
  optics::Detector detector{250.0};
  models::Sample sample = models::Sample::from_mM(5.0, 63.0, 10.0, 5e-22);
  simkit::NoiseModel noise;
  optics::FormulaMode formula_mode = optics::FormulaMode::corrected;
  std::uint64_t seed = 0;

  const optics::GaussianBeam& beam(const std::string& name) const {
    const auto it = beams.find(name);
    if (it == beams.end())
      throw ConfigError("/beams/" + name, "beam is not defined");
    return it->second;
  }
};

/// Canonical defaults of the reference experiment: a 532 nm pump producing
/// degenerate 1064 nm pairs, NA 0.7 focusing/collection lens, 500 um
/// diameter detector, 5 mM Rh6G in a 126 um cell, 200/s dark and 10/s
/// background counts.
inline nlohmann::json default_config_json() {
  return nlohmann::json{
      {"seed", 0},
      {"formula_mode", "corrected"},
      {"source",
       {{"pump_wavelength_nm", 532.0},
        {"crystal_length_mm", 20.0},
        {"pump_waist_um", 70.0},
        {"pairs_per_mw", 3.48e8},
        {"max_pump_power_mw", 2500.0},
        {"center_wavelength_nm", 1064.0},
        {"bandwidth_nm", 30.0},
        {"transverse_sigma_corr_um",
         spdc::TransverseCorrelation::calibrated_default().sigma_corr_um}}},
      {"beams",
       {{"pump_532",
         {{"wavelength_nm", 532.0}, {"waist_w0_um", 4.4}, {"numerical_aperture", 0.7}}},
        {"laser_1064",
         {{"wavelength_nm", 1064.0}, {"waist_w0_um", 1.5}, {"numerical_aperture", 0.7}}},
        {"spdc_1064",
         {{"wavelength_nm", 1064.0}, {"waist_w0_um", 4.5}, {"numerical_aperture", 0.7}}}}},
      {"detector", {{"radius_wd_um", 250.0}}},
      {"sample",
       {{"concentration_mM", 5.0},
        {"half_thickness_d_um", 63.0},
        {"tpa_cross_section_gm", 10.0},
        {"etpa_cross_section_cm2", 5e-22}}},
      {"noise", {{"dark_rate_per_s", 200.0}, {"background_rate_per_s", 10.0}}}};
}

namespace detail {

inline double require_number(const nlohmann::json& node,
                             const std::string& pointer) {
  if (!node.is_number())
    throw ConfigError(pointer, "expected a number");
  return node.get<double>();
}

inline void reject_unknown_keys(const nlohmann::json& node,
                                const std::string& pointer,
                                std::initializer_list<const char*> known) {
  for (const auto& [key, _] : node.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok)
      throw ConfigError(pointer + "/" + key,
                        "unknown key (check the unit suffix)");
  }
}

/// Recursive merge of `user` over `base` (objects merge, everything else
/// replaces).
inline nlohmann::json deep_merge(nlohmann::json base,
                                 const nlohmann::json& user) {
  if (!base.is_object() || !user.is_object()) return user;
  for (const auto& [key, value] : user.items()) {
    if (base.contains(key))
      base[key] = deep_merge(base[key], value);
    else
      base[key] = value;
  }
  return base;
}

}  // namespace detail

/// Builds and validates a configuration from merged JSON. Errors carry the
/// JSON pointer of the offending value.
inline ExperimentConfig config_from_json(const nlohmann::json& user) {
  using detail::reject_unknown_keys;
  using detail::require_number;
  if (!user.is_object()) throw ConfigError("", "config must be a JSON object");
  const nlohmann::json j = detail::deep_merge(default_config_json(), user);
  reject_unknown_keys(j, "", {"seed", "formula_mode", "source", "beams",
                              "detector", "sample", "noise"});

  ExperimentConfig cfg;

  if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
    throw ConfigError("/seed", "expected a nonnegative integer");
  cfg.seed = j["seed"].get<std::uint64_t>();

  if (!j["formula_mode"].is_string())
    throw ConfigError("/formula_mode", "expected 'paper' or 'corrected'");
  try {
    cfg.formula_mode =
        optics::formula_mode_from_string(j["formula_mode"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/formula_mode", e.what());
  }

  for (const char* section : {"source", "beams", "detector", "sample", "noise"})
    if (!j[section].is_object())
      throw ConfigError(std::string("/") + section, "expected an object");

  {
    const auto& s = j["source"];
    reject_unknown_keys(s, "/source",
                        {"pump_wavelength_nm", "crystal_length_mm",
                         "pump_waist_um", "pairs_per_mw", "max_pump_power_mw",
                         "center_wavelength_nm", "bandwidth_nm",
                         "transverse_sigma_corr_um"});
    cfg.source.pump_wavelength_nm =
        require_number(s["pump_wavelength_nm"], "/source/pump_wavelength_nm");
    cfg.source.crystal_length_mm =
        require_number(s["crystal_length_mm"], "/source/crystal_length_mm");
    cfg.source.pump_waist_um =
        require_number(s["pump_waist_um"], "/source/pump_waist_um");
    cfg.source.pairs_per_mw =
        require_number(s["pairs_per_mw"], "/source/pairs_per_mw");
    cfg.source.max_pump_power_mw =
        require_number(s["max_pump_power_mw"], "/source/max_pump_power_mw");
    cfg.source.center_wavelength_nm = require_number(
        s["center_wavelength_nm"], "/source/center_wavelength_nm");
    cfg.source.bandwidth_nm =
        require_number(s["bandwidth_nm"], "/source/bandwidth_nm");
    if (cfg.source.pairs_per_mw <= 0.0)
      throw ConfigError("/source/pairs_per_mw", "must be > 0");
    if (cfg.source.max_pump_power_mw <= 0.0)
      throw ConfigError("/source/max_pump_power_mw", "must be > 0");
    try {
      cfg.correlation = spdc::TransverseCorrelation(require_number(
          s["transverse_sigma_corr_um"], "/source/transverse_sigma_corr_um"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/source/transverse_sigma_corr_um", e.what());
    }
  }

  {
    const auto& beams = j["beams"];
    if (!beams.is_object() || beams.empty())
      throw ConfigError("/beams", "expected at least one named beam");
    for (const auto& [name, b] : beams.items()) {
      const std::string base = "/beams/" + name;
      reject_unknown_keys(b, base,
                          {"wavelength_nm", "waist_w0_um", "numerical_aperture"});
      const double wl = require_number(b["wavelength_nm"], base + "/wavelength_nm");
      const double w0 = require_number(b["waist_w0_um"], base + "/waist_w0_um");
      const double na =
          require_number(b["numerical_aperture"], base + "/numerical_aperture");
      if (!(wl > 0.0)) throw ConfigError(base + "/wavelength_nm", "must be > 0");
      if (!(w0 > 0.0)) throw ConfigError(base + "/waist_w0_um", "must be > 0");
      if (!(na > 0.0 && na < 1.0))
        throw ConfigError(base + "/numerical_aperture", "must be in (0, 1)");
      cfg.beams.emplace(name, optics::GaussianBeam::from_nm(wl, w0, na));
    }
    for (const char* required : {"pump_532", "laser_1064", "spdc_1064"})
      if (!cfg.beams.contains(required))
        throw ConfigError(std::string("/beams/") + required,
                          "required beam is missing");
  }

  {
    const auto& d = j["detector"];
    reject_unknown_keys(d, "/detector", {"radius_wd_um"});
    const double r = require_number(d["radius_wd_um"], "/detector/radius_wd_um");
    if (!(r > 0.0)) throw ConfigError("/detector/radius_wd_um", "must be > 0");
    cfg.detector = optics::Detector(r);
  }

  {
    const auto& s = j["sample"];
    reject_unknown_keys(s, "/sample",
                        {"concentration_mM", "half_thickness_d_um",
                         "tpa_cross_section_gm", "etpa_cross_section_cm2"});
    const double mm =
        require_number(s["concentration_mM"], "/sample/concentration_mM");
    const double d =
        require_number(s["half_thickness_d_um"], "/sample/half_thickness_d_um");
    const double delta =
        require_number(s["tpa_cross_section_gm"], "/sample/tpa_cross_section_gm");
    std::optional<double> sigma_e;
    if (!s["etpa_cross_section_cm2"].is_null())
      sigma_e = require_number(s["etpa_cross_section_cm2"],
                               "/sample/etpa_cross_section_cm2");
    try {
      cfg.sample = models::Sample::from_mM(mm, d, delta, sigma_e);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/sample", e.what());
    }
  }

  {
    const auto& n = j["noise"];
    reject_unknown_keys(n, "/noise", {"dark_rate_per_s", "background_rate_per_s"});
    const double dark =
        require_number(n["dark_rate_per_s"], "/noise/dark_rate_per_s");
    const double bg = require_number(n["background_rate_per_s"],
                                     "/noise/background_rate_per_s");
    try {
      cfg.noise = simkit::NoiseModel(dark, bg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/noise", e.what());
    }
  }

  return cfg;
}

inline ExperimentConfig default_config() {
  return config_from_json(nlohmann::json::object());
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);  // parse errors report byte positions
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

/// Canonical serialized form (sorted keys, defaults merged in) used for the
/// provenance hash.
inline std::string canonical_config_string(const nlohmann::json& user) {
  return detail::deep_merge(default_config_json(), user).dump();
}

/// FNV-1a 64-bit hash of the canonical config string.
inline std::uint64_t config_hash(const nlohmann::json& user) {
  const std::string s = canonical_config_string(user);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace etpa::config
