#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "etpa/optics.hpp"

// Absorption-rate equations and the normalized axial fluorescence profiles
// of the epifluorescence Z-scan. Rate equations work in CGS (cm, s); profile
// geometry stays in um.

namespace etpa::models {

inline constexpr double kGmToCm4s = 1e-50;          // 1 GM
inline constexpr double kPerMilliMolarToPerCm3 = 6.02214076e17;
inline constexpr double kUmToCm = 1e-4;
inline constexpr double kSpdcCenterWavelengthUm = 1.064;

struct Sample {
  double concentration_per_cm3;
  double half_thickness_d_um;       // d in the profile formulas; cell is 2d thick
  double tpa_cross_section_gm;      // delta
  std::optional<double> etpa_cross_section_cm2;  // sigma_e, when known

  Sample(double concentration_per_cm3_, double half_thickness_d_um_,
         double tpa_cross_section_gm_,
         std::optional<double> etpa_cross_section_cm2_ = std::nullopt)
      : concentration_per_cm3(concentration_per_cm3_),
        half_thickness_d_um(half_thickness_d_um_),
        tpa_cross_section_gm(tpa_cross_section_gm_),
        etpa_cross_section_cm2(etpa_cross_section_cm2_) {
    if (!(concentration_per_cm3 > 0.0))
      throw std::invalid_argument("Sample: concentration must be > 0");
    if (!(half_thickness_d_um > 0.0))
      throw std::invalid_argument("Sample: half thickness must be > 0");
    if (tpa_cross_section_gm < 0.0)
      throw std::invalid_argument("Sample: TPA cross-section must be >= 0");
    if (etpa_cross_section_cm2 && *etpa_cross_section_cm2 < 0.0)
      throw std::invalid_argument("Sample: ETPA cross-section must be >= 0");
  }

  static Sample from_mM(double concentration_mM, double half_thickness_d_um,
                        double tpa_cross_section_gm,
                        std::optional<double> etpa_cross_section_cm2 =
                            std::nullopt) {
    return Sample(concentration_mM * kPerMilliMolarToPerCm3,
                  half_thickness_d_um, tpa_cross_section_gm,
                  etpa_cross_section_cm2);
  }

  /// Full optical path length l = 2d, in cm.
  double path_length_cm() const { return 2.0 * half_thickness_d_um * kUmToCm; }
};

struct PairFieldParams {
  double entanglement_area_cm2;  // A_e
  double coherence_time_s;       // T

  PairFieldParams(double area_cm2, double time_s)
      : entanglement_area_cm2(area_cm2), coherence_time_s(time_s) {
    if (!(entanglement_area_cm2 > 0.0))
      throw std::invalid_argument("PairFieldParams: A_e must be > 0");
    if (!(coherence_time_s > 0.0))
      throw std::invalid_argument("PairFieldParams: T must be > 0");
  }
};

/// Normalized axial profile sampled on a z grid. `normalization` is the
/// signed raw peak value that was divided out, so raw = values *
/// normalization; max(values) == 1 at the peak-magnitude grid point.
struct AxialProfile {
  std::vector<double> positions_um;
  std::vector<double> values;
  double normalization = 1.0;
  std::string model_id;
  bool sign_flipped = false;
};

/// TPA rate under continuous-wave excitation, events/s.
inline double tpa_rate(const Sample& sample, double beam_area_cm2,
                       double laser_rate_per_s) {
  if (!(beam_area_cm2 > 0.0))
    throw std::domain_error("tpa_rate: beam area must be > 0");
  if (laser_rate_per_s < 0.0)
    throw std::domain_error("tpa_rate: photon rate must be >= 0");
  const double delta_cm4s = sample.tpa_cross_section_gm * kGmToCm4s;
  return sample.concentration_per_cm3 * beam_area_cm2 *
         sample.path_length_cm() * delta_cm4s * laser_rate_per_s *
         laser_rate_per_s / (beam_area_cm2 * beam_area_cm2);
}

/// ETPA rate under continuous-wave pair excitation, events/s. Linear in the
/// pair rate; with A_e = A it reduces to C l delta R_pair / (T A).
inline double etpa_rate(const Sample& sample, double beam_area_cm2,
                        const PairFieldParams& pair_params,
                        double pair_rate_per_s) {
  if (!(beam_area_cm2 > 0.0))
    throw std::domain_error("etpa_rate: beam area must be > 0");
  if (pair_rate_per_s < 0.0)
    throw std::domain_error("etpa_rate: pair rate must be >= 0");
  const double delta_cm4s = sample.tpa_cross_section_gm * kGmToCm4s;
  const double sigma_e = delta_cm4s / (pair_params.entanglement_area_cm2 *
                                       pair_params.coherence_time_s);
  return sample.concentration_per_cm3 * beam_area_cm2 *
         sample.path_length_cm() * sigma_e * pair_rate_per_s / beam_area_cm2;
}

namespace detail {

inline void check_grid(std::span<const double> z_grid_um) {
  if (z_grid_um.empty())
    throw std::invalid_argument("z grid must be nonempty");
  for (std::size_t i = 1; i < z_grid_um.size(); ++i)
    if (!(z_grid_um[i] > z_grid_um[i - 1]))
      throw std::invalid_argument("z grid must be strictly increasing");
}

/// Normalize by the peak-magnitude grid value; flip sign when that value is
/// negative so max(values) == 1 either way.
inline AxialProfile normalize(std::vector<double> positions,
                              std::vector<double> raw, std::string model_id) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < raw.size(); ++i)
    if (std::abs(raw[i]) > std::abs(raw[imax])) imax = i;
  const double peak = raw[imax];
  if (peak == 0.0)
    throw std::domain_error("profile is identically zero on the grid");
  for (double& v : raw) v /= peak;
  AxialProfile profile;
  profile.positions_um = std::move(positions);
  profile.values = std::move(raw);
  profile.normalization = peak;
  profile.model_id = std::move(model_id);
  profile.sign_flipped = peak < 0.0;
  return profile;
}

}  // namespace detail

/// R_SPA(z) = arctan((z+d)/w_z) - arctan((z-d)/w_z), unit peak over the grid.
inline AxialProfile zscan_profile_spa(const optics::GaussianBeam& beam,
                                      const optics::Detector& det,
                                      const Sample& sample,
                                      optics::FormulaMode mode,
                                      std::span<const double> z_grid_um) {
  detail::check_grid(z_grid_um);
  const double wz = optics::effective_waist_spa(beam, det, mode);
  const double d = sample.half_thickness_d_um;
  std::vector<double> raw(z_grid_um.size());
  for (std::size_t i = 0; i < z_grid_um.size(); ++i) {
    const double z = z_grid_um[i];
    raw[i] = std::atan((z + d) / wz) - std::atan((z - d) / wz);
  }
  return detail::normalize({z_grid_um.begin(), z_grid_um.end()},
                           std::move(raw), "spa");
}

/// R_TPA(z) = w_zTP [arctan((z+d)/z_R) - arctan((z-d)/z_R)]
///          - z_R  [arctan((z+d)/w_zTP) - arctan((z-d)/w_zTP)],
/// normalized to unit peak magnitude over the grid.
inline AxialProfile zscan_profile_tpa(const optics::GaussianBeam& beam,
                                      const optics::Detector& det,
                                      const Sample& sample,
                                      optics::FormulaMode mode,
                                      std::span<const double> z_grid_um) {
  detail::check_grid(z_grid_um);
  const double wz = optics::effective_waist_tpa(beam, det, mode);
  const double zr = optics::rayleigh_range(beam);
  const double d = sample.half_thickness_d_um;
  std::vector<double> raw(z_grid_um.size());
  for (std::size_t i = 0; i < z_grid_um.size(); ++i) {
    const double z = z_grid_um[i];
    raw[i] = wz * (std::atan((z + d) / zr) - std::atan((z - d) / zr)) -
             zr * (std::atan((z + d) / wz) - std::atan((z - d) / wz));
  }
  return detail::normalize({z_grid_um.begin(), z_grid_um.end()},
                           std::move(raw), "tpa");
}

/// ETPA profile convention: the TPA model evaluated at the SPDC central
/// wavelength (1064 nm), tagged "etpa".
inline AxialProfile zscan_profile_etpa(const optics::GaussianBeam& beam,
                                       const optics::Detector& det,
                                       const Sample& sample,
                                       optics::FormulaMode mode,
                                       std::span<const double> z_grid_um) {
  AxialProfile profile = zscan_profile_tpa(
      beam.with_wavelength_um(kSpdcCenterWavelengthUm), det, sample, mode,
      z_grid_um);
  profile.model_id = "etpa";
  return profile;
}

/// Linear-interpolated full width at half maximum.
inline double profile_fwhm(const AxialProfile& profile) {
  const auto& v = profile.values;
  const auto& z = profile.positions_um;
  if (v.size() < 3)
    throw std::runtime_error("profile not resolvable: too few points");
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[imax]) imax = i;
  if (imax == 0 || imax + 1 == v.size())
    throw std::runtime_error("profile not resolvable: peak on grid boundary");
  const double half = v[imax] / 2.0;

  auto cross = [&](std::size_t inner, std::size_t outer) {
    // linear interpolation of the half-max position between two grid points
    const double t = (half - v[outer]) / (v[inner] - v[outer]);
    return z[outer] + t * (z[inner] - z[outer]);
  };

  double left = 0.0, right = 0.0;
  bool found_left = false, found_right = false;
  for (std::size_t i = imax; i-- > 0;) {
    if (v[i] < half) {
      left = cross(i + 1, i);
      found_left = true;
      break;
    }
  }
  for (std::size_t i = imax + 1; i < v.size(); ++i) {
    if (v[i] < half) {
      right = cross(i - 1, i);
      found_right = true;
      break;
    }
  }
  if (!found_left || !found_right)
    throw std::runtime_error(
        "profile not resolvable: half maximum not bracketed");
  return right - left;
}

}  // namespace etpa::models
