#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etpa/fitkit.hpp"
#include "etpa/models.hpp"
#include "etpa/simkit.hpp"
#include "etpa/version.hpp"

// File interchange. CSV for measured/synthetic series and profiles, JSON for
// fit results and reports. Numeric CSV fields use the shortest
// representation that round-trips, so identical inputs give byte-identical
// files.

namespace etpa::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw IoError("invalid number '" + s + "' in " + context);
  return v;
}

inline long long parse_int(const std::string& s, const std::string& context) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw IoError("invalid integer '" + s + "' in " + context);
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::string iso_timestamp() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Provenance block common to every output file. The timestamp is the only
/// field allowed to differ between identical reruns.
inline nlohmann::json make_provenance(std::uint64_t config_hash,
                                      std::uint64_t seed) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash));
  return nlohmann::json{{"tool", kToolName},
                        {"version", kToolVersion},
                        {"config_fnv1a", std::string(hex)},
                        {"seed", seed},
                        {"timestamp", iso_timestamp()}};
}

// ---------------------------------------------------------------------- CSV

inline void write_count_series_csv(const std::filesystem::path& path,
                                   const simkit::CountSeries& series,
                                   const nlohmann::json& provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  nlohmann::json meta = provenance;
  meta.erase("timestamp");  // CSV stays byte-identical across reruns
  meta["generating"] = series.provenance;
  out << "# " << kToolName << " " << kToolVersion << " " << meta.dump() << "\n";
  out << "kind,seed\n";
  out << simkit::to_string(series.kind) << "," << series.seed << "\n";
  out << "x,counts,exposure_s,dark_counts\n";
  for (const auto& rec : series.records)
    out << format_double(rec.x) << "," << rec.counts << ","
        << format_double(rec.exposure_s) << "," << rec.dark_counts << "\n";
}

inline simkit::CountSeries read_count_series_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  std::string comment_meta;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto brace = line.find('{');
      if (brace != std::string::npos && comment_meta.empty())
        comment_meta = line.substr(brace);
      continue;
    }
    lines.push_back(line);
  }
  if (lines.size() < 4 || lines[0] != "kind,seed" ||
      lines[2] != "x,counts,exposure_s,dark_counts")
    throw IoError(path.string() + ": not a count-series CSV");
  const auto head = split_csv_line(lines[1]);
  if (head.size() != 2) throw IoError(path.string() + ": malformed kind,seed row");

  simkit::CountSeries series;
  series.kind = simkit::series_kind_from_string(head[0]);
  series.seed = static_cast<std::uint64_t>(parse_int(head[1], "seed"));
  if (!comment_meta.empty()) {
    const auto meta = nlohmann::json::parse(comment_meta, nullptr, false);
    if (meta.is_object() && meta.contains("generating"))
      series.provenance = meta["generating"];
  }
  for (std::size_t i = 3; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 4)
      throw IoError(path.string() + ": expected 4 columns in data row");
    simkit::CountRecord rec;
    rec.x = parse_double(f[0], "column x");
    rec.counts = parse_int(f[1], "column counts");
    rec.exposure_s = parse_double(f[2], "column exposure_s");
    rec.dark_counts = parse_int(f[3], "column dark_counts");
    series.records.push_back(rec);
  }
  if (series.records.empty())
    throw IoError(path.string() + ": series has no records");
  return series;
}

inline void write_profile_csv(const std::filesystem::path& path,
                              const models::AxialProfile& profile,
                              const nlohmann::json& provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  nlohmann::json meta = provenance;
  meta.erase("timestamp");
  meta["model"] = profile.model_id;
  meta["normalization"] = profile.normalization;
  meta["sign_flipped"] = profile.sign_flipped;
  out << "# " << kToolName << " " << kToolVersion << " " << meta.dump() << "\n";
  out << "z_um,normalized_rate\n";
  for (std::size_t i = 0; i < profile.positions_um.size(); ++i)
    out << format_double(profile.positions_um[i]) << ","
        << format_double(profile.values[i]) << "\n";
}

// --------------------------------------------------------------------- JSON

inline nlohmann::json fit_result_to_json(const fitkit::FitResult& fit) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, est] : fit.parameters)
    params[name] = {{"value", est.value}, {"sigma", est.sigma}};
  return nlohmann::json{{"model_id", fit.model_id},
                        {"params", params},
                        {"r_squared", fit.r_squared},
                        {"rmse", fit.rmse},
                        {"converged", fit.converged},
                        {"iterations", fit.iterations},
                        {"residuals", fit.residuals}};
}

inline fitkit::FitResult fit_result_from_json(const nlohmann::json& j) {
  fitkit::FitResult fit;
  fit.model_id = j.at("model_id").get<std::string>();
  for (const auto& [name, est] : j.at("params").items())
    fit.parameters[name] = {est.at("value").get<double>(),
                            est.at("sigma").get<double>()};
  fit.r_squared = j.at("r_squared").is_number() ? j.at("r_squared").get<double>()
                                                : 0.0;
  fit.rmse = j.at("rmse").get<double>();
  fit.converged = j.at("converged").get<bool>();
  fit.iterations = j.at("iterations").get<int>();
  if (j.contains("residuals"))
    fit.residuals = j.at("residuals").get<std::vector<double>>();
  return fit;
}

inline nlohmann::json verdict_to_json(const fitkit::SignatureVerdict& v) {
  return nlohmann::json{{"verdict", fitkit::to_string(v.verdict)},
                        {"rmse_linear", v.rmse_linear},
                        {"rmse_quadratic", v.rmse_quadratic},
                        {"ratio_threshold_used", v.ratio_threshold_used}};
}

inline nlohmann::json cross_section_report_to_json(
    const fitkit::CrossSectionReport& report) {
  return nlohmann::json{
      {"sigma_e_cm2", report.sigma_e_cm2},
      {"sigma_e_times_A_cm4", report.sigma_e_times_A_cm4},
      {"beam_area_A_cm2", report.beam_area_A_cm2},
      {"area_convention", report.area_convention},
      {"paper_product_discrepancy", report.paper_product_discrepancy},
      {"paper_product_note",
       "the published sigma_e*A ~ 2e-34 is not reproducible from sigma_e ~ "
       "5e-22 cm^2 and the stated waist under this area convention"}};
}

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace etpa::io
